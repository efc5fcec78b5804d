#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>

#include "json.hpp"
#include "pdsde/montecarlo.hpp"

using namespace pdsde;

TEST_CASE("payoff parsing and evaluation") {
    Payoff s = Payoff::parse("sin", {{"scale", 2.0}});
    double x = 0.4;
    CHECK(s(&x) == doctest::Approx(std::sin(0.8)).epsilon(1e-15));
    CHECK(s.sup_bound() == 1.0);

    Payoff ind = Payoff::parse("indicator", {{"threshold", 0.5}});
    double a = 0.6, b = 0.4;
    CHECK(ind(&a) == 1.0);
    CHECK(ind(&b) == 0.0);

    Payoff cl = Payoff::parse("clamp", {{"lo", -1.0}, {"hi", 2.0}});
    double big = 5.0;
    CHECK(cl(&big) == 2.0);
    CHECK(cl.sup_bound() == 2.0);

    CHECK_THROWS_AS(Payoff::parse("nope"), std::invalid_argument);
    CHECK_THROWS_AS(Payoff::parse("clamp", {{"lo", 1.0}, {"hi", 1.0}}), std::invalid_argument);
}

TEST_CASE("constant payoff gives zero standard error") {
    SdeModel m = builtin_model("zero-drift");
    Payoff always = Payoff::parse("indicator", {{"threshold", -1e12}});
    auto est = estimate_expectation(m, SchemeKind::TruncatedEm, 8, 1.0, always, 500, 3);
    CHECK(est.mean == 1.0);
    CHECK(est.se == 0.0);
    CHECK(est.n_paths == 500);
}

TEST_CASE("brownian sign symmetry through the indicator payoff") {
    SdeModel m = builtin_model("zero-drift");
    Payoff ind = Payoff::parse("indicator");
    auto est = estimate_expectation(m, SchemeKind::TruncatedEm, 8, 1.0, ind, 20000, 4);
    CHECK(std::fabs(est.mean - 0.5) <= 3.0 * est.se);
}

TEST_CASE("ou-linear matches the Gaussian closed form") {
    SdeModel m = builtin_model("ou-linear", {{"a", -1.0}, {"x0", 1.0}});
    Payoff s = Payoff::parse("sin");
    int M = 64;
    auto est = estimate_expectation(m, SchemeKind::TruncatedEm, M, 1.0, s, 40000, 5);
    // X(1) ~ N(e^{-1}, (1 - e^{-2})/2); E sin = sin(mu) e^{-v/2}
    double mu = std::exp(-1.0), v = (1.0 - std::exp(-2.0)) / 2.0;
    double exact = std::sin(mu) * std::exp(-v / 2.0);
    CHECK(std::fabs(est.mean - exact) <= 3.0 * est.se + 5.0 / M);
}

TEST_CASE("estimates are reproducible and worker-count independent") {
    SdeModel m = builtin_model("holder-supnorm", {{"c", 0.5}});
    Payoff s = Payoff::parse("sin");
    auto a = estimate_expectation(m, SchemeKind::TruncatedEm, 8, 1.0, s, 2000, 9);
    setenv("PDSDE_WORKERS", "4", 1);
    auto b = estimate_expectation(m, SchemeKind::TruncatedEm, 8, 1.0, s, 2000, 9);
    unsetenv("PDSDE_WORKERS");
    CHECK(a.mean == b.mean);
    CHECK(a.se == b.se);
}

TEST_CASE("standard error follows the root-n law") {
    SdeModel m = builtin_model("zero-drift");
    Payoff s = Payoff::parse("sin");
    auto small = estimate_expectation(m, SchemeKind::TruncatedEm, 8, 1.0, s, 4000, 12);
    auto large = estimate_expectation(m, SchemeKind::TruncatedEm, 8, 1.0, s, 16000, 12);
    double ratio = small.se / large.se;
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.6);
}

TEST_CASE("fit_order recovers exact power laws") {
    auto rows = [](double c, double p) {
        std::vector<WeakErrorRow> out;
        for (int M : {8, 16, 32, 64}) {
            WeakErrorRow r;
            r.M = M;
            r.delta = 1.0 / M;
            r.error = c * std::pow(r.delta, p);
            r.se = 1e-9 * r.error;
            r.resolved = true;
            out.push_back(r);
        }
        return out;
    };
    CHECK(fit_order(rows(2.0, 1.0)).first == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit_order(rows(0.3, 0.5)).first == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fit_order recovers a noisy slope within its own error bar") {
    std::vector<WeakErrorRow> rows;
    std::vector<double> noise = {1.04, 0.97, 1.02, 0.95, 1.03};
    int i = 0;
    for (int M : {8, 16, 32, 64, 128}) {
        WeakErrorRow r;
        r.M = M;
        r.delta = 1.0 / M;
        r.error = 0.5 * std::sqrt(r.delta) * noise[i++];
        r.se = 0.05 * r.error;
        r.resolved = true;
        rows.push_back(r);
    }
    auto [order, se] = fit_order(rows);
    CHECK(std::fabs(order - 0.5) <= 2.0 * se + 0.05);
}

TEST_CASE("fit_order input validation") {
    std::vector<WeakErrorRow> two = {{8, 0.125, 0.1, 1e-4, true}, {16, 0.0625, 0.05, 1e-4, true}};
    CHECK_THROWS_AS(fit_order(two), std::invalid_argument);
    std::vector<WeakErrorRow> flat = {{8, 0.125, 0.1, 1e-4, true},
                                      {8, 0.125, 0.2, 1e-4, true},
                                      {8, 0.125, 0.3, 1e-4, true}};
    CHECK_THROWS_AS(fit_order(flat), std::invalid_argument);
}

TEST_CASE("weak_error_table validates the level structure") {
    SdeModel m = builtin_model("zero-drift");
    Payoff s = Payoff::parse("sin");
    CHECK_THROWS_AS(weak_error_table(m, SchemeKind::TruncatedEm, {16, 8}, 1.0, s, 200, 1, 256),
                    std::invalid_argument);
    // 48/8 = 6 is not a power of two
    CHECK_THROWS_AS(weak_error_table(m, SchemeKind::TruncatedEm, {8, 24}, 1.0, s, 200, 1, 48),
                    std::invalid_argument);
}

TEST_CASE("exact schemes produce an all-zero table") {
    SdeModel m = builtin_model("zero-drift");
    Payoff s = Payoff::parse("sin");
    auto rep = weak_error_table(m, SchemeKind::TruncatedEm, {8, 16, 32}, 1.0, s, 500, 2, 128);
    // differences vanish up to summation-order rounding of the shared increments
    for (const auto& r : rep.rows)
        CHECK(r.error <= 64.0 * std::numeric_limits<double>::epsilon());
    CHECK_FALSE(rep.fitted_order.has_value());
    CHECK(rep.note == "scheme exact");
}

TEST_CASE("weak error report serializes and reproduces") {
    SdeModel m = builtin_model("holder-supnorm", {{"c", 0.5}});
    Payoff s = Payoff::parse("sin");
    auto a = weak_error_table(m, SchemeKind::TruncatedEm, {4, 8}, 0.5, s, 500, 6, 64);
    auto b = weak_error_table(m, SchemeKind::TruncatedEm, {4, 8}, 0.5, s, 500, 6, 64);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].error == b.rows[i].error);
        CHECK(a.rows[i].se == b.rows[i].se);
    }
    auto j = nlohmann::json::parse(a.to_json());
    CHECK(j["rows"].size() == 2);
    CHECK(j["reference_M"] == 64);
    CHECK((j["regime_tag"] == "inside-theorem" || j["regime_tag"] == "outside-theorem"));
    // CSV: header + one line per level
    std::string csv = a.to_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("common random numbers shrink the difference stderr") {
    SdeModel m = builtin_model("ou-linear", {{"a", -1.0}, {"x0", 1.0}});
    Payoff s = Payoff::parse("sin");
    long n = 4000;
    auto rep = weak_error_table(m, SchemeKind::TruncatedEm, {8}, 1.0, s, n, 15, 128);
    auto ea = estimate_expectation(m, SchemeKind::TruncatedEm, 8, 1.0, s, n, 16);
    auto eb = estimate_expectation(m, SchemeKind::TruncatedEm, 128, 1.0, s, n, 17);
    double independent_se = std::sqrt(ea.se * ea.se + eb.se * eb.se);
    CHECK(rep.rows[0].se < independent_se);
}

TEST_CASE("smooth problems recover weak order one") {
    SdeModel m = builtin_model("ou-linear", {{"a", -1.0}, {"x0", 1.0}});
    Payoff s = Payoff::parse("sin", {{"scale", 3.0}});
    auto rep = weak_error_table(m, SchemeKind::TruncatedEm, {4, 8, 16}, 1.0, s, 60000, 3, 256);
    REQUIRE(rep.fitted_order.has_value());
    CHECK(*rep.fitted_order >= 0.8);
    CHECK(*rep.fitted_order <= 1.3);
}
