#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pdsde/scheme.hpp"

using namespace pdsde;

namespace {

BrownianPath zero_noise(int d, int n, double dt) {
    BrownianPath bp;
    bp.d = d;
    bp.n_fine = n;
    bp.dt_fine = dt;
    bp.incr.assign(static_cast<std::size_t>(n) * d, 0.0);
    return bp;
}

Trajectory history_only(double tau, int M, double x0, double y0 = 0.0, bool pair = false) {
    Trajectory t;
    t.tau = tau;
    t.M = M;
    t.d = 1;
    t.n_hist = M;
    t.n_steps = 1;
    t.x.assign(M + 2, x0);
    if (pair) t.y.assign(M + 2, y0);
    return t;
}

}  // namespace

TEST_CASE("sliding max tracks a moving window") {
    SlidingMax sm(3);
    std::vector<double> vals = {1.0, 5.0, 2.0, 0.5, 0.4, 7.0, 1.0, 1.0, 1.0};
    std::vector<double> expect = {1.0, 5.0, 5.0, 5.0, 2.0, 7.0, 7.0, 7.0, 1.0};
    for (int i = 0; i < static_cast<int>(vals.size()); ++i) {
        sm.push(i, vals[i]);
        CHECK(sm.max() == expect[i]);
    }
}

TEST_CASE("zero-drift model is reproduced exactly by every applicable scheme") {
    SdeModel m = builtin_model("zero-drift", {{"sigma", 2.0}, {"x0", 0.5}});
    int M = 8, n_steps = 16;
    double dlt = m.tau / M;
    BrownianPath bp = sample_brownian(42, 3, 1, n_steps, dlt);
    for (SchemeKind kind : {SchemeKind::TruncatedEm, SchemeKind::EmInterpolated}) {
        Trajectory traj = simulate(m, kind, M, 2.0, bp);
        double x = 0.5;
        CHECK(traj.at(0)[0] == x);
        for (int k = 0; k < n_steps; ++k) {
            x = x + 2.0 * bp.row(k)[0];
            CHECK(traj.at(k + 1)[0] == x);  // bitwise: same arithmetic
        }
    }
}

TEST_CASE("deterministic Euler hand value") {
    SdeModel m = builtin_model("ou-linear", {{"a", -1.0}});
    Trajectory t = history_only(1.0, 2, 1.0);
    double dW = 0.0;
    Vec next = truncated_em_step(m, t, 0, &dW);
    CHECK(next[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("point-delay drift hand value on a constant history") {
    SdeModel m = builtin_model("holder-point-delay", {{"c", 1.0}, {"alpha", 0.5}});
    Trajectory t = history_only(1.0, 2, 1.0);
    double dW = 0.0;
    // b = 0, Z = |xi(-tau)|^{1/2} = 1: X(delta) = 1 + delta
    Vec next = em_interpolated_step(m, t, 0, &dW);
    CHECK(next[0] == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("hamiltonian variation-of-constants hand values") {
    SdeModel m = builtin_model("hamiltonian-holder", {{"a1", 0.0}, {"a2", 0.0}, {"c", 0.0}});
    double dW = 0.0;
    double dlt = 0.5;

    Trajectory t1 = history_only(1.0, 2, 1.0, 0.0, true);
    auto [x1, y1] = hamiltonian_step(m, t1, 0, &dW);
    CHECK(x1[0] == doctest::Approx(std::exp(dlt)).epsilon(1e-14));
    CHECK(y1[0] == doctest::Approx(0.0).epsilon(1e-14));

    Trajectory t2 = history_only(1.0, 2, 0.0, 1.0, true);
    auto [x2, y2] = hamiltonian_step(m, t2, 0, &dW);
    CHECK(x2[0] == doctest::Approx(std::exp(dlt) - 1.0).epsilon(1e-14));
    CHECK(y2[0] == doctest::Approx(1.0).epsilon(1e-14));

    // Euler first-component variant
    Trajectory t3 = history_only(1.0, 2, 1.0, 2.0, true);
    auto [x3, y3] = hamiltonian_step(m, t3, 0, &dW, true);
    CHECK(x3[0] == doctest::Approx(1.0 + 3.0 * dlt).epsilon(1e-14));
    CHECK(y3[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("simulate is deterministic in (seed, path-index)") {
    SdeModel m = builtin_model("holder-supnorm", {{"c", 0.5}});
    BrownianPath bp = sample_brownian(7, 11, 1, 32, m.tau / 16);
    Trajectory a = simulate(m, SchemeKind::TruncatedEm, 16, 2.0, bp);
    Trajectory b = simulate(m, SchemeKind::TruncatedEm, 16, 2.0, bp);
    CHECK(a.x == b.x);
}

TEST_CASE("interpolated and truncated EM coincide at grid anchors for grid-lag drifts") {
    // sup-norm drift reads only grid nodes, point delay at lag tau likewise
    for (const char* name : {"holder-supnorm", "holder-point-delay"}) {
        SdeModel m = builtin_model(name, {{"c", 0.5}, {"alpha", 0.5}});
        BrownianPath bp = sample_brownian(9, 0, 1, 24, m.tau / 8);
        Trajectory ti = simulate(m, SchemeKind::EmInterpolated, 8, 3.0, bp);
        Trajectory tt = simulate(m, SchemeKind::TruncatedEm, 8, 3.0, bp);
        CHECK(ti.x == tt.x);
    }
}

TEST_CASE("coarse run on a fine Brownian table matches the pre-aggregated run") {
    SdeModel m = builtin_model("holder-supnorm", {{"c", 0.5}});
    int M = 8, n_steps = 16, factor = 4;
    double dlt = m.tau / M;
    BrownianPath fine = sample_brownian(13, 2, 1, n_steps * factor, dlt / factor);
    BrownianPath coarse;
    coarse.d = 1;
    coarse.n_fine = n_steps;
    coarse.dt_fine = dlt;
    coarse.incr = aggregate_increments(fine, factor);
    Trajectory a = simulate(m, SchemeKind::TruncatedEm, M, 2.0, fine);
    Trajectory b = simulate(m, SchemeKind::TruncatedEm, M, 2.0, coarse);
    CHECK(a.x == b.x);
}

TEST_CASE("incremental drift evaluation matches stepwise segment construction") {
    struct Case {
        const char* name;
        std::map<std::string, double> params;
        SchemeKind kind;
    };
    std::vector<Case> cases = {
        {"holder-supnorm", {{"c", 0.5}, {"alpha", 0.5}}, SchemeKind::TruncatedEm},
        {"holder-supnorm", {{"c", 0.5}, {"alpha", 0.5}}, SchemeKind::EmInterpolated},
        {"holder-point-delay", {{"c", 0.7}, {"lag", 0.625}}, SchemeKind::TruncatedEm},
        {"infinite-exp", {{"c", 0.4}, {"r", 1.0}}, SchemeKind::TruncatedEm},
        {"gradient-gaussian", {}, SchemeKind::TruncatedEm},
    };
    for (const auto& tc : cases) {
        CAPTURE(tc.name);
        SdeModel m = builtin_model(tc.name, tc.params);
        int M = 8, n_steps = 24;
        double dlt = m.tau / M;
        BrownianPath bp = sample_brownian(21, 5, 1, n_steps, dlt);
        Trajectory traj = simulate(m, tc.kind, M, n_steps * dlt, bp);
        for (int k = 0; k < n_steps; ++k) {
            Vec next = tc.kind == SchemeKind::EmInterpolated
                           ? em_interpolated_step(m, traj, k, bp.row(k))
                           : truncated_em_step(m, traj, k, bp.row(k));
            CHECK(traj.at(k + 1)[0] == doctest::Approx(next[0]).epsilon(1e-12));
        }
    }
}

TEST_CASE("hamiltonian simulate matches stepwise evaluation") {
    SdeModel m = builtin_model("hamiltonian-holder");
    int M = 8, n_steps = 16;
    double dlt = m.tau / M;
    BrownianPath bp = sample_brownian(33, 1, 1, n_steps, dlt);
    for (bool euler_x : {false, true}) {
        SchemeKind kind = euler_x ? SchemeKind::HamiltonianEulerX : SchemeKind::Hamiltonian;
        Trajectory traj = simulate(m, kind, M, n_steps * dlt, bp);
        for (int k = 0; k < n_steps; ++k) {
            auto [nx, ny] = hamiltonian_step(m, traj, k, bp.row(k), euler_x);
            CHECK(traj.at(k + 1)[0] == doctest::Approx(nx[0]).epsilon(1e-12));
            CHECK(traj.yat(k + 1)[0] == doctest::Approx(ny[0]).epsilon(1e-12));
        }
    }
}

TEST_CASE("hamiltonian deterministic limit is first order in the stepsize") {
    SdeModel m = builtin_model("hamiltonian-holder", {{"c", 0.0}, {"x0", 1.0}, {"y0", 0.5}});
    double T = 1.0;
    auto run = [&](int M) {
        BrownianPath bp = zero_noise(1, M, m.tau / M);
        Trajectory t = simulate(m, SchemeKind::Hamiltonian, M, T, bp);
        return t.at(t.n_steps)[0];
    };
    double fine = run(8192);
    double e1 = std::fabs(run(64) - fine);
    double e2 = std::fabs(run(128) - fine);
    CHECK(e1 / e2 > 1.5);
    CHECK(e1 / e2 < 2.5);
}

TEST_CASE("segment bounds hold along simulated trajectories") {
    SdeModel m = builtin_model("holder-supnorm", {{"c", 0.5}});
    int M = 8, n_steps = 32;
    BrownianPath bp = sample_brownian(55, 8, 1, n_steps, m.tau / M);
    Trajectory traj = simulate(m, SchemeKind::TruncatedEm, M, n_steps * m.tau / M, bp);
    PathView view = traj.view();
    for (int anchor = 0; anchor <= n_steps; ++anchor)
        CHECK(interpolated_norm_bound_check(view, anchor, M));
}

TEST_CASE("scheme and memory kinds must match") {
    SdeModel fin = builtin_model("holder-supnorm");
    SdeModel ham = builtin_model("hamiltonian-holder");
    SdeModel inf = builtin_model("infinite-exp");
    BrownianPath bp = sample_brownian(1, 0, 1, 8, fin.tau / 8);
    CHECK_THROWS_AS(simulate(fin, SchemeKind::Hamiltonian, 8, 1.0, bp), std::invalid_argument);
    CHECK_THROWS_AS(simulate(ham, SchemeKind::TruncatedEm, 8, 1.0, bp), std::invalid_argument);
    CHECK_THROWS_AS(simulate(inf, SchemeKind::EmInterpolated, 8, 1.0, bp), std::invalid_argument);
}

TEST_CASE("grid validation errors") {
    SdeModel m = builtin_model("zero-drift");
    BrownianPath bp = sample_brownian(1, 0, 1, 8, m.tau / 8);
    // T not a whole number of steps
    CHECK_THROWS_AS(simulate(m, SchemeKind::TruncatedEm, 8, 1.03, bp), std::invalid_argument);
    // Brownian table too short
    CHECK_THROWS_AS(simulate(m, SchemeKind::TruncatedEm, 8, 2.0, bp), std::invalid_argument);
    // dimension mismatch
    BrownianPath bp2 = sample_brownian(1, 0, 2, 8, m.tau / 8);
    CHECK_THROWS_AS(simulate(m, SchemeKind::TruncatedEm, 8, 1.0, bp2), std::invalid_argument);
}

TEST_CASE("reference solution grid cap guards memory") {
    SdeModel m = builtin_model("zero-drift");
    BrownianPath bp = sample_brownian(1, 0, 1, 8, m.tau / 8);
    CHECK_THROWS_AS(reference_solution(m, 1e6, bp, 1 << 20), std::invalid_argument);
}
