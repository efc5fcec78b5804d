#pragma once

#include <cstdint>
#include <string>

#include "pdsde/montecarlo.hpp"
#include "pdsde/scheme.hpp"

namespace pdsde {

// Log-weights above this are capped during aggregation (capped paths counted).
inline constexpr double kLogWeightCap = 30.0;

enum class WeightVariant { R1, R2 };
enum class PerturbationVariant { H1, H2, H3, H4 };

// Integrand q(t) of the exponential-moment diagnostics.
enum class QKind {
    SegmentNormSq,    // ||Y_t||_inf^2
    SigmaInvZSq,      // |sigma^{-1} Z(Y_t)|^2
    PerturbationSq,   // |h(t)|^2
    PairNormSq,       // ||U_t||_inf^2 + ||V_t||_inf^2 (Hamiltonian)
};

struct GirsanovWeight {
    double log_weight = 0.0;  // = stochastic_integral - quadratic_variation_half
    double stochastic_integral = 0.0;
    double quadratic_variation_half = 0.0;
    bool finite = true;
};

// The model with the functional drift switched off: the reference SDE whose
// law the R-weights transfer.
SdeModel reference_model(const SdeModel& model);

// Drift mismatch at grid time index t_idx along a reference trajectory. The
// b-difference terms cancel exactly at grid anchors, leaving the negated
// functional drift through sigma^{-1}.
Vec perturbation_h(const SdeModel& model, const Trajectory& traj, PerturbationVariant variant,
                   int t_idx);

// Discrete Radon-Nikodym log-weight along a trajectory (left-point rule on
// the scheme grid). R1 and R2 coincide at grid anchors; the variant is kept
// for report provenance.
GirsanovWeight weight_along_path(const SdeModel& model, const Trajectory& traj,
                                 const BrownianPath& bp, WeightVariant variant);

struct ImportanceEstimate {
    MonteCarloEstimate estimate;  // E[R f(Y)]
    double weight_mean = 0.0;     // should be 1 (martingale property)
    double weight_se = 0.0;
    long cap_count = 0;
    double cap_rate = 0.0;
    long n_flagged = 0;
};

ImportanceEstimate importance_sampled_expectation(const SdeModel& model, const Payoff& payoff,
                                                  double T, int M, long n_paths,
                                                  std::uint64_t seed, WeightVariant variant);

struct NovikovThreshold {
    double lambda_max = 0.0;  // +infinity when the condition is vacuous
    std::string formula_id;
};

NovikovThreshold novikov_threshold(const SdeModel& model, QKind q, double T);

struct NovikovReport {
    double lambda = 0.0;
    double mean = 0.0;
    double se = 0.0;
    double max_sample = 0.0;
    bool empirically_unbounded = false;
    NovikovThreshold threshold;
    long n_paths = 0;
};

// Monte Carlo estimate of E exp(lambda * int_0^T q(t) dt) along reference
// paths, with trapezoidal time quadrature.
NovikovReport novikov_margin(const SdeModel& model, QKind q, double T, int M, long n_paths,
                             std::uint64_t seed, double lambda);

}  // namespace pdsde
