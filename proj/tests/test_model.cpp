#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "json.hpp"
#include "pdsde/model.hpp"

using namespace pdsde;

namespace {

SdeModel bare_model(double L1, double L2, double beta, double alpha) {
    SdeModel m;
    m.name = "bare";
    m.d = 1;
    m.sigma = Mat::identity(1);
    m.sigma_inv = Mat::identity(1);
    m.sigma_hs = 1.0;
    m.sigma_inv_hs = 1.0;
    m.B = Mat::scaled_identity(1, 0.0);
    m.k.L1 = L1;
    m.k.L2 = L2;
    m.k.beta = beta;
    m.k.alpha = alpha;
    return m;
}

}  // namespace

TEST_CASE("catalog covers all seven models and rejects unknown names") {
    auto names = catalog_names();
    REQUIRE(names.size() == 7);
    for (const auto& n : names) CHECK_NOTHROW(builtin_model(n));
    CHECK_THROWS_AS(builtin_model("no-such-model"), std::invalid_argument);
}

TEST_CASE("parameter range validation") {
    CHECK_THROWS_AS(builtin_model("holder-supnorm", {{"alpha", 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(builtin_model("holder-supnorm", {{"alpha", 1.5}}), std::invalid_argument);
    CHECK_THROWS_AS(builtin_model("holder-supnorm", {{"tau", -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(builtin_model("zero-drift", {{"sigma", 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(builtin_model("hamiltonian-holder", {{"gamma_d3", 99.0}}),
                    std::invalid_argument);
}

TEST_CASE("zero-drift model has vanishing drift and constants") {
    SdeModel m = builtin_model("zero-drift");
    CHECK(m.k.L1 == 0.0);
    CHECK(m.k.L2 == 0.0);
    CHECK(m.zkind == FunctionalKind::None);
    CHECK(m.drift_b({3.0})[0] == 0.0);
}

TEST_CASE("ou-linear dissipativity constant is 2a") {
    SdeModel m = builtin_model("ou-linear", {{"a", -1.0}});
    CHECK(m.k.beta == -2.0);
    CHECK(m.drift_b({2.0})[0] == -2.0);
    // 2<x, ax> = 2a|x|^2 with equality
    double x = 1.7;
    CHECK(2.0 * x * m.drift_b({x})[0] == doctest::Approx(m.k.beta * x * x).epsilon(1e-15));
}

TEST_CASE("gradient-gaussian drift matches -(sigma sigma*) grad V") {
    SdeModel m = builtin_model("gradient-gaussian", {{"v", 1.0}});
    // V(x) = |x|^2, sigma = I: Z0(x) = -2x
    CHECK(m.drift_b({1.5})[0] == doctest::Approx(-3.0).epsilon(1e-15));
    CHECK(m.potential_V({2.0}) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("holder scalar convention at zero") {
    CHECK(holder_scalar(0.0, 0.5) == 0.0);
    CHECK(holder_scalar(-4.0, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(holder_scalar(9.0, 0.5) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("functional drift on constant segments") {
    SdeModel pd = builtin_model("holder-point-delay", {{"c", 1.0}, {"alpha", 0.5}});
    SegmentPath seg = SegmentPath::constant(pd.tau, 8, {4.0});
    CHECK(evaluate_functional_drift(pd, seg)[0] == doctest::Approx(2.0).epsilon(1e-14));

    SdeModel sn = builtin_model("holder-supnorm", {{"c", 0.5}, {"alpha", 1.0}});
    SegmentPath seg2 = SegmentPath::constant(sn.tau, 8, {-4.0});
    CHECK(evaluate_functional_drift(sn, seg2)[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("sup-norm functional picks the largest magnitude node") {
    SdeModel sn = builtin_model("holder-supnorm", {{"c", 1.0}, {"alpha", 0.5}});
    SegmentPath seg;
    seg.tau = 1.0;
    seg.M = 2;
    seg.d = 1;
    seg.values = {1.0, -9.0, 2.0};
    CHECK(evaluate_functional_drift(sn, seg)[0] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("distributed uniform quadrature integrates a linear segment to one half") {
    SdeModel m = builtin_model("gradient-gaussian", {{"c", 1.0}, {"alpha", 1.0}});
    int M = 400;
    SegmentPath seg;
    seg.tau = m.tau;
    seg.M = M;
    seg.d = 1;
    seg.values.resize(M + 1);
    for (int j = 0; j <= M; ++j) seg.values[j] = static_cast<double>(j) / M;  // 0 at -tau, 1 at 0
    // z(x) = x, rho uniform: integral = 1/2; trapezoid is exact for linear data
    CHECK(evaluate_functional_drift(m, seg)[0] == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("distributed point mass reduces to evaluation at the atom") {
    SdeModel m = builtin_model("gradient-gaussian", {{"c", 1.0}, {"alpha", 1.0}, {"rho_point", 0.0}});
    SegmentPath seg;
    seg.tau = m.tau;
    seg.M = 4;
    seg.d = 1;
    seg.values = {0.1, 0.2, 0.3, 0.4, 0.8};
    CHECK(evaluate_functional_drift(m, seg)[0] == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("catalog constants hold on random samples") {
    std::mt19937 gen(5);
    std::normal_distribution<double> nd(0.0, 2.0);
    for (const auto& name : catalog_names()) {
        SdeModel m = builtin_model(name);
        for (int rep = 0; rep < 500; ++rep) {
            Vec x(m.d), y(m.d);
            for (int c = 0; c < m.d; ++c) {
                x[c] = nd(gen);
                y[c] = nd(gen);
            }
            if (m.is_hamiltonian()) {
                Vec bx = m.drift_b2(x, y), by = m.drift_b2(y, x);
                double diff2 = 0.0, arg2 = 0.0;
                for (int c = 0; c < m.d; ++c) {
                    diff2 += (bx[c] - by[c]) * (bx[c] - by[c]);
                    arg2 += (x[c] - y[c]) * (x[c] - y[c]) + (y[c] - x[c]) * (y[c] - x[c]);
                }
                CHECK(std::sqrt(diff2) <= m.k.K1 * std::sqrt(arg2) + 1e-9);
            } else {
                Vec bx = m.drift_b(x), by = m.drift_b(y);
                double diff = 0.0, arg = 0.0, xb = 0.0, x2 = 0.0;
                for (int c = 0; c < m.d; ++c) {
                    diff += (bx[c] - by[c]) * (bx[c] - by[c]);
                    arg += (x[c] - y[c]) * (x[c] - y[c]);
                    xb += x[c] * bx[c];
                    x2 += x[c] * x[c];
                }
                CHECK(std::sqrt(diff) <= m.k.L1 * std::sqrt(arg) + 1e-9);
                CHECK(2.0 * xb <= m.k.C + m.k.beta * x2 + 1e-9);
            }
        }
    }
}

TEST_CASE("functional drift is Hoelder in the segment sup distance") {
    std::mt19937 gen(23);
    std::normal_distribution<double> nd;
    SdeModel m = builtin_model("holder-supnorm", {{"c", 0.7}, {"alpha", 0.5}});
    for (int rep = 0; rep < 2000; ++rep) {
        SegmentPath a, b;
        a.tau = b.tau = m.tau;
        a.M = b.M = 4;
        a.d = b.d = 1;
        a.values.resize(5);
        b.values.resize(5);
        double dist = 0.0;
        for (int j = 0; j < 5; ++j) {
            a.values[j] = nd(gen);
            b.values[j] = nd(gen);
            dist = std::max(dist, std::fabs(a.values[j] - b.values[j]));
        }
        double dz = std::fabs(evaluate_functional_drift(m, a)[0] -
                              evaluate_functional_drift(m, b)[0]);
        CHECK(dz <= m.k.L2 * std::pow(dist, m.k.alpha) + 1e-9);
    }
}

TEST_CASE("hamiltonian dissipativity inequality at random points") {
    SdeModel m = builtin_model("hamiltonian-holder");
    double al = m.k.alpha_d3, be = m.k.beta_d3, ga = m.k.gamma_d3, la = m.k.lambda_d3;
    CHECK(la > 0.0);
    std::mt19937 gen(31);
    std::normal_distribution<double> nd(0.0, 3.0);
    for (int rep = 0; rep < 10000; ++rep) {
        double x = nd(gen), y = nd(gen);
        double b = m.drift_b2({x}, {y})[0];
        double form = (al * x + ga * y) * (x + y) + (be * y + ga * x) * b;
        CHECK(form <= m.k.C - la * (x * x + y * y) + 1e-9);
    }
}

TEST_CASE("printed kappa2 closed form") {
    CHECK(printed_kappa2(3.0, 5.0, 0.0) == doctest::Approx(1.5).epsilon(1e-15));
    // alpha=2, beta=2, gamma=1: 0.5*min(2 - 0.5*(2/1 + 1/2), 2 - 2*1/(2/1 + 1/2))
    CHECK(printed_kappa2(2.0, 2.0, 1.0) == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(printed_kappa2(2.0, 2.0, -1.0) == doctest::Approx(0.375).epsilon(1e-14));
}

TEST_CASE("admissible horizon closed-form oracle") {
    // 2(4 L1^2 + L2^2) = 0.1, beta = 0: T_max = e^{-1/2}/sqrt(0.1)
    SdeModel m = bare_model(0.1, 0.1, 0.0, 1.0);
    AdmissibleHorizon h = admissible_horizon(m, TheoremId::Th1);
    CHECK(h.feasible);
    CHECK(h.T_max == doctest::Approx(std::exp(-0.5) / std::sqrt(0.1)).epsilon(1e-6));
    CHECK(horizon_condition_holds(m, TheoremId::Th1, h.T_max * 0.999));
    CHECK_FALSE(horizon_condition_holds(m, TheoremId::Th1, h.T_max * 1.001));
}

TEST_CASE("zero constants give an unbounded horizon") {
    SdeModel m = bare_model(0.0, 0.0, 0.0, 1.0);
    AdmissibleHorizon h = admissible_horizon(m, TheoremId::Th1);
    CHECK(std::isinf(h.T_max));
}

TEST_CASE("horizon is antitone in the Hoelder constant") {
    double prev = std::numeric_limits<double>::infinity();
    for (double L2 : {0.05, 0.1, 0.2, 0.4, 0.8}) {
        SdeModel m = bare_model(0.0, L2, 0.0, 1.0);
        double t = admissible_horizon(m, TheoremId::Th2).T_max;
        CHECK(t <= prev + 1e-12);
        prev = t;
    }
}

TEST_CASE("theorem 5 feasible set is a window in T") {
    SdeModel m = builtin_model("gradient-gaussian");
    // the dissipative exp(-(1+beta T)) term needs T large, the 1/T terms need
    // T small; the default constants leave a window around T = 1.25
    CHECK(horizon_condition_holds(m, TheoremId::Th5, 1.25));
    CHECK_FALSE(horizon_condition_holds(m, TheoremId::Th5, 0.5));
    CHECK_FALSE(horizon_condition_holds(m, TheoremId::Th5, 50.0));
    AdmissibleHorizon h = admissible_horizon(m, TheoremId::Th5);
    CHECK(h.T_max > 0.0);
    CHECK(std::isfinite(h.T_max));
}

TEST_CASE("infinite-memory storage horizon truncates the weighted tail below tolerance") {
    SdeModel m = builtin_model("infinite-exp");
    CHECK(m.t_hist > 0.0);
    double cycles = m.t_hist / m.tau;
    CHECK(cycles == doctest::Approx(std::round(cycles)).epsilon(1e-12));
    CHECK(std::exp(-m.rate_r * m.t_hist) * 1e3 <= 1e-12 * (1.0 + 1e-9));
}

TEST_CASE("manifest is valid JSON listing the catalog") {
    auto j = nlohmann::json::parse(catalog_manifest());
    REQUIRE(j.contains("models"));
    std::vector<std::string> listed;
    for (const auto& mj : j["models"]) listed.push_back(mj["name"]);
    CHECK(listed == catalog_names());
}
