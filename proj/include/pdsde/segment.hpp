#pragma once

#include <vector>

#include "pdsde/linalg.hpp"

namespace pdsde {

enum class SegmentKind { LinearInterp, LeftTruncated, InfiniteWeighted };

// Discretized history window of a trajectory. Nodes sit at
// theta = -tau, -tau + delta, ..., 0 with delta = tau / M (oldest first).
// For the infinite-memory variant tau is the stored-history horizon.
struct SegmentPath {
    double tau = 0.0;
    int M = 0;
    int d = 1;
    SegmentKind kind = SegmentKind::LinearInterp;
    double rate_r = 0.0;
    std::vector<double> values;  // (M + 1) * d

    double delta() const { return tau / M; }
    int length() const { return static_cast<int>(values.size()) / d; }

    // j-th stored node, j = 0 oldest ... length()-1 most recent.
    const double* node(int j) const { return values.data() + static_cast<std::size_t>(j) * d; }

    // Value at theta = -i * delta.
    const double* at_lag(int i) const { return node(length() - 1 - i); }

    static SegmentPath constant(double tau, int M, const Vec& c,
                                SegmentKind kind = SegmentKind::LinearInterp);
};

struct HistoryNorm {
    enum class Kind { Sup, ExpWeighted };
    Kind kind = Kind::Sup;
    double rate_r = 0.0;
};

// Read-only view into a grid-sampled trajectory. Grid times are integer
// multiples of the stepsize; index 0 is time zero.
struct PathView {
    const double* data = nullptr;
    int d = 1;
    int first_idx = 0;  // grid index of data[0]
    int n = 0;          // node count

    const double* at(int idx) const {
        return data + static_cast<std::size_t>(idx - first_idx) * d;
    }
    bool contains(int idx) const { return idx >= first_idx && idx < first_idx + n; }
    int last_idx() const { return first_idx + n - 1; }
};

// Piecewise-linear evaluation of a segment at theta in [-tau, 0].
// Reproduces stored nodes exactly at grid lags.
Vec interpolate_segment(const SegmentPath& path, double theta);

// Left-truncated segment evaluation on a stored trajectory:
// value at min(t + theta, floor(t/delta) * delta). Queries landing between
// grid nodes are linearly interpolated; grid hits are exact.
Vec truncated_segment_eval(const PathView& path, double t, double theta, double delta);

double segment_norm(const SegmentPath& path, const HistoryNorm& norm);

// Checks the interpolation bound: the sup norm of the linearly interpolated
// segment anchored at grid index anchor_idx never exceeds
// max(exact segment norm at anchor, exact segment norm one window earlier).
// The interpolant is probed at sub-grid points so the check is non-vacuous.
bool interpolated_norm_bound_check(const PathView& traj, int anchor_idx, int M,
                                   int probes_per_interval = 7);

// Builds the linear-interpolation segment anchored at grid index anchor_idx
// from trajectory nodes (anchor-M .. anchor).
SegmentPath grid_segment(const PathView& traj, int anchor_idx, int M, double tau,
                         SegmentKind kind = SegmentKind::LinearInterp, double rate_r = 0.0);

}  // namespace pdsde
