#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pdsde/girsanov.hpp"
#include "pdsde/model.hpp"

namespace pdsde {

struct DiagnosticReport {
    std::string check_id;
    std::string verdict;  // pass / fail / inconclusive
    std::string notes;
    std::map<std::string, double> stats;
    std::vector<std::map<std::string, double>> rows;

    std::string to_json() const;
};

enum class DisplacementOp { Interpolated, Truncated };

// Monte Carlo estimate of E || Y_t - op(Y)_t ||_inf^p across stepsize levels,
// with Y the model's reference solution on a common fine grid and t the most
// level-misaligned time t = T - delta/2. Verdict: the ratio estimate /
// delta^exponent stays within bound_factor across levels, with exponent
// (p-2)/2 for the interpolated operator and p/2 for the truncated one.
DiagnosticReport displacement_scaling(const SdeModel& model, int p, const std::vector<int>& levels,
                                      double T, long n_paths, std::uint64_t seed,
                                      DisplacementOp op, double bound_factor = 4.0,
                                      int fine_mult = 16);

// Sandwich check for the quadratic pair function W(x,y) = alpha/2|x|^2 +
// beta/2|y|^2 + gamma<x,y> against kappa_1 = (1+alpha)(1+beta)/2 and the
// printed closed-form kappa_2. The printed kappa_2 can be non-positive or
// exceed the exact smallest eigenvalue inside the admissible region; such
// points are reported as a discrepancy (stats + notes), with the verdict
// taken from the exact eigenvalue sandwich.
DiagnosticReport lyapunov_bounds_check(double alpha, double beta, double gamma, long n_samples,
                                       std::uint64_t seed);

struct Mu0Result {
    bool diverged = false;
    double value = 0.0;
    double domain_R = 0.0;
    std::string notes;
};

// Quadrature of int e^{kappa |Z(x)|^2} C_V e^{-V(x)} dx on [-R, R]^d (d <= 2),
// R chosen so the Gaussian-envelope tail is below 1e-10 of the total.
Mu0Result mu0_integrability(const SdeModel& model, double kappa, int grid_n = 4001);

// Juxtaposes empirical exponential-moment estimates with the theoretical
// lambda threshold for the chosen integrand.
DiagnosticReport exponential_moment_sweep(const SdeModel& model, QKind q, double T, int M,
                                          const std::vector<double>& lambdas, long n_paths,
                                          std::uint64_t seed);

}  // namespace pdsde
