#pragma once

#include <deque>
#include <utility>

#include "pdsde/brownian.hpp"
#include "pdsde/model.hpp"
#include "pdsde/segment.hpp"

namespace pdsde {

enum class SchemeKind {
    EmInterpolated,     // segment argument: piecewise-linear interpolation
    TruncatedEm,        // segment argument: values frozen at the last grid time
    Hamiltonian,        // variation-of-constants first component
    HamiltonianEulerX,  // plain Euler first component (comparison variant)
};

const char* scheme_name(SchemeKind kind);
SchemeKind default_scheme(const SdeModel& model);

// Grid trajectory on [-n_hist*delta, n_steps*delta]; index 0 is time zero.
// Hamiltonian models carry a second component in y with the same layout.
struct Trajectory {
    double tau = 1.0;
    int M = 1;
    int d = 1;
    int n_hist = 0;
    int n_steps = 0;
    std::vector<double> x;
    std::vector<double> y;

    double delta() const { return tau / M; }
    double* at(int k) { return x.data() + static_cast<std::size_t>(k + n_hist) * d; }
    const double* at(int k) const { return x.data() + static_cast<std::size_t>(k + n_hist) * d; }
    double* yat(int k) { return y.data() + static_cast<std::size_t>(k + n_hist) * d; }
    const double* yat(int k) const { return y.data() + static_cast<std::size_t>(k + n_hist) * d; }
    PathView view() const { return {x.data(), d, -n_hist, n_hist + n_steps + 1}; }
    PathView yview() const { return {y.data(), d, -n_hist, n_hist + n_steps + 1}; }
};

// Sliding-window maximum over consecutive grid indices (monotone deque,
// O(1) amortized per push).
class SlidingMax {
public:
    explicit SlidingMax(int window_nodes) : window_(window_nodes) {}
    void push(int idx, double v) {
        while (!dq_.empty() && dq_.back().second <= v) dq_.pop_back();
        dq_.emplace_back(idx, v);
        while (dq_.front().first <= idx - window_) dq_.pop_front();
    }
    double max() const { return dq_.front().second; }

private:
    std::deque<std::pair<int, double>> dq_;
    int window_;
};

// Incremental functional-drift evaluator along a grid path. Nodes are fed in
// index order; drift() evaluates Z with the window anchored at the last fed
// node. Matches the segment-based evaluate_functional_drift up to roundoff
// (exactly, for the non-rolling kinds).
class DriftEvaluator {
public:
    DriftEvaluator(const SdeModel& model, int M, int n_hist, double dlt);
    void push(int idx, const double* v);
    void drift(const PathView& path, int k, Vec& out) const;  // non-pair kinds
    double window_sup(int k) const;  // raw sup over the anchored window

private:
    const SdeModel& model_;
    int M_;
    int n_hist_;
    double dlt_;
    int window_nodes_;
    SlidingMax smax_;
    // distributed kind: ring of pointwise z values over the window + rolling sum
    std::vector<double> zring_;
    Vec zsum_;
    Vec scratch_;
};

// Single-step operations (O(window) segment construction; the simulate loop
// uses the incremental evaluators instead).
Vec em_interpolated_step(const SdeModel& model, const Trajectory& traj, int k, const double* dW);
Vec truncated_em_step(const SdeModel& model, const Trajectory& traj, int k, const double* dW);
std::pair<Vec, Vec> hamiltonian_step(const SdeModel& model, const Trajectory& traj, int k,
                                     const double* dW, bool euler_x = false);

// Full run on [-tau, T] (history horizon t_hist for infinite memory). The
// Brownian table must cover [0, T] with n_fine a multiple of the step count;
// coarse increments are aggregated left-to-right.
Trajectory simulate(const SdeModel& model, SchemeKind kind, int M, double T,
                    const BrownianPath& bp);

// Fine-grid truncated-EM (or Hamiltonian) run used as the common-noise
// reference in weak-error differences.
Trajectory reference_solution(const SdeModel& model, double T, const BrownianPath& bp, int M_ref);

}  // namespace pdsde
