#include "pdsde/segment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdsde {

SegmentPath SegmentPath::constant(double tau, int M, const Vec& c, SegmentKind kind) {
    SegmentPath p;
    p.tau = tau;
    p.M = M;
    p.d = static_cast<int>(c.size());
    p.kind = kind;
    p.values.resize(static_cast<std::size_t>(M + 1) * c.size());
    for (int j = 0; j <= M; ++j)
        std::copy(c.begin(), c.end(), p.values.begin() + static_cast<std::size_t>(j) * c.size());
    return p;
}

Vec interpolate_segment(const SegmentPath& path, double theta) {
    const double tau = path.tau;
    const double dlt = path.delta();
    if (theta < -tau - 1e-12 * tau || theta > 1e-12 * std::max(tau, 1.0))
        throw std::domain_error("interpolate_segment: theta outside [-tau, 0]");
    theta = std::clamp(theta, -tau, 0.0);

    // theta in [-(i+1)delta, -i*delta]
    int i = static_cast<int>(std::floor(-theta / dlt));
    if (i >= path.M) i = path.M - 1;
    double w_hi = (theta + (1 + i) * dlt) / dlt;  // weight on node at lag i
    double w_lo = (theta + i * dlt) / dlt;        // -weight on node at lag i+1
    const double* hi = path.at_lag(i);
    const double* lo = path.at_lag(i + 1);
    Vec out(path.d);
    for (int c = 0; c < path.d; ++c) out[c] = w_hi * hi[c] - w_lo * lo[c];
    return out;
}

namespace {

// Linear interpolation on the trajectory grid; exact at nodes.
Vec eval_on_grid(const PathView& path, double s, double delta) {
    double u = s / delta;
    int lo = static_cast<int>(std::floor(u + 1e-9));
    double frac = u - lo;
    if (frac < 1e-9) frac = 0.0;
    if (frac > 1.0 - 1e-9) {
        ++lo;
        frac = 0.0;
    }
    if (!path.contains(lo) || (frac > 0.0 && !path.contains(lo + 1)))
        throw std::domain_error("truncated_segment_eval: query before stored history");
    Vec out(path.d);
    const double* a = path.at(lo);
    if (frac == 0.0) {
        for (int c = 0; c < path.d; ++c) out[c] = a[c];
    } else {
        const double* b = path.at(lo + 1);
        for (int c = 0; c < path.d; ++c) out[c] = (1.0 - frac) * a[c] + frac * b[c];
    }
    return out;
}

}  // namespace

Vec truncated_segment_eval(const PathView& path, double t, double theta, double delta) {
    double t_delta = std::floor(t / delta + 1e-9) * delta;
    double s = std::min(t + theta, t_delta);
    return eval_on_grid(path, s, delta);
}

double segment_norm(const SegmentPath& path, const HistoryNorm& norm) {
    if (path.values.empty()) throw std::invalid_argument("segment_norm: empty path");
    const int len = path.length();
    const double dlt = path.delta();
    double best = 0.0;
    for (int j = 0; j < len; ++j) {
        double v = norm2(path.node(j), path.d);
        if (norm.kind == HistoryNorm::Kind::ExpWeighted) {
            double theta = -(len - 1 - j) * dlt;
            v *= std::exp(norm.rate_r * theta);
        }
        best = std::max(best, v);
    }
    return best;
}

SegmentPath grid_segment(const PathView& traj, int anchor_idx, int M, double tau,
                         SegmentKind kind, double rate_r) {
    SegmentPath seg;
    seg.tau = tau;
    seg.M = M;
    seg.d = traj.d;
    seg.kind = kind;
    seg.rate_r = rate_r;
    seg.values.resize(static_cast<std::size_t>(M + 1) * traj.d);
    for (int j = 0; j <= M; ++j) {
        const double* v = traj.at(anchor_idx - M + j);
        std::copy(v, v + traj.d, seg.values.begin() + static_cast<std::size_t>(j) * traj.d);
    }
    return seg;
}

bool interpolated_norm_bound_check(const PathView& traj, int anchor_idx, int M,
                                   int probes_per_interval) {
    SegmentPath hat = grid_segment(traj, anchor_idx, M, /*tau=*/1.0);
    const double dlt = hat.delta();

    double hat_sup = 0.0;
    for (int i = 0; i < M; ++i) {
        for (int p = 0; p <= probes_per_interval; ++p) {
            double theta = -(i + static_cast<double>(p) / probes_per_interval) * dlt;
            hat_sup = std::max(hat_sup, norm2(interpolate_segment(hat, theta)));
        }
    }

    auto window_max = [&](int end_idx) {
        double m = 0.0;
        for (int j = end_idx - M; j <= end_idx; ++j) m = std::max(m, norm2(traj.at(j), traj.d));
        return m;
    };
    double bound = std::max(window_max(anchor_idx), window_max(anchor_idx - M));
    return hat_sup <= bound * (1.0 + 1e-12) + 1e-14;
}

}  // namespace pdsde
