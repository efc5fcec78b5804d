#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pdsde/linalg.hpp"
#include "pdsde/segment.hpp"

namespace pdsde {

// |x|^alpha with the convention 0^alpha = 0 (no smoothing at the origin).
inline double holder_scalar(double x, double alpha) {
    if (x == 0.0) return 0.0;
    return std::pow(std::fabs(x), alpha);
}

enum class MemoryKind { Finite, Infinite, Hamiltonian, Distributed };

// How the functional drift Z reads the history.
enum class FunctionalKind {
    None,           // Z = 0
    PointDelay,     // c * |xi(-lag)|^alpha * e1
    SupNorm,        // c * ||xi||_inf^alpha * e1
    ExpWeighted,    // c * ||xi||_r^alpha * e1 (infinite memory)
    Distributed,    // integral of pointwise z against rho
    PairPointDelay  // Hamiltonian: c * (|xi(-lag)|^alpha + |eta(-lag)|^alpha) * e1
};

struct ModelConstants {
    double L1 = 0.0;       // Lipschitz constant of b
    double L2 = 0.0;       // Hoelder constant of Z (finite memory)
    double beta = 0.0;     // one-sided growth: 2<x,b(x)> <= C + beta|x|^2
    double C = 0.0;
    double alpha = 1.0;    // Hoelder exponent of Z
    double L3 = 0.0;       // Lipschitz constant of the initial segment
    double L4 = 0.0;       // Hoelder constant of Z on the weighted history space
    double K1 = 0.0;       // Hamiltonian: Lipschitz constant of b(x,y)
    double K2 = 0.0;       // Hamiltonian: Hoelder constant of Z
    double alpha_d3 = 0.0; // Hamiltonian dissipativity constants
    double beta_d3 = 0.0;
    double gamma_d3 = 0.0;
    double lambda_d3 = 0.0;
    double L0 = 0.0;       // gradient kind: Lipschitz constant of Z0
    double kappa = 0.0;    // gradient kind: exponential integrability level
    double m = 0.0;        // polynomial factor exponent in the local Hoelder bound
    double r = 0.0;        // exponential history weight
};

// Probability measure rho on [-tau, 0] for distributed delay.
struct DelayMeasure {
    bool uniform = true;
    std::vector<std::pair<double, double>> atoms;  // (theta, weight), weights sum to 1
};

struct SdeModel {
    std::string name;
    int d = 1;
    MemoryKind memory = MemoryKind::Finite;
    double tau = 1.0;

    Mat sigma;
    Mat sigma_inv;
    double sigma_hs = 0.0;
    double sigma_inv_hs = 0.0;

    ModelConstants k;

    // b is linear for every catalog model: b(x) = B x (Hamiltonian: b(x,y) = Bx x + By y).
    Mat B;
    Mat Bx, By;
    Vec drift_b(const Vec& x) const { return B.apply(x); }
    Vec drift_b2(const Vec& x, const Vec& y) const;

    FunctionalKind zkind = FunctionalKind::None;
    double zc = 0.0;      // functional drift coefficient
    double zlag = 0.0;    // delay lag for point-delay kinds (a multiple of delta at run time)
    DelayMeasure rho;

    // Pointwise drift pieces for the distributed (gradient) kind.
    Vec z_point(const Vec& x) const;
    double potential_V(const Vec& x) const;
    double v_coeff = 0.0;  // V(x) = v_coeff * |x|^2

    // Initial segments, evaluable on [-tau, 0].
    std::function<Vec(double)> initial;
    std::function<Vec(double)> initial2;  // Hamiltonian second component

    // Infinite-memory storage horizon (see infinite_history_horizon).
    double rate_r = 0.0;
    double t_hist = 0.0;

    bool is_hamiltonian() const { return memory == MemoryKind::Hamiltonian; }
};

struct AdmissibleHorizon {
    double T_max = 0.0;  // +infinity reported as std::numeric_limits<double>::infinity()
    std::string formula_id;
    bool feasible = true;
};

enum class TheoremId { Th1, Th2, Th3, Th4, Th5 };

// Largest T > 0 satisfying the theorem's smallness condition (scan + bisection).
AdmissibleHorizon admissible_horizon(const SdeModel& model, TheoremId theorem);

// Whether the theorem's smallness condition holds at the given horizon T.
// Feasible sets need not be intervals, so runs are tagged at their actual T.
bool horizon_condition_holds(const SdeModel& model, TheoremId theorem, double T);

// Closed-form kappa_2 for the quadratic Lyapunov pair function, as printed
// (gamma = 0 handled as the limit min(alpha, beta) / 2).
double printed_kappa2(double alpha, double beta, double gamma);

// Catalog construction. Throws on unknown names or out-of-range parameters.
SdeModel builtin_model(const std::string& name, const std::map<std::string, double>& params = {});

// Z applied to a segment; for the distributed kind, quadrature of z_point
// against rho on the segment grid (trapezoid for the uniform density).
Vec evaluate_functional_drift(const SdeModel& model, const SegmentPath& segment);
Vec evaluate_functional_drift_pair(const SdeModel& model, const SegmentPath& pos,
                                   const SegmentPath& vel);

// Machine-readable catalog manifest (names, parameters, defaults, ranges).
std::string catalog_manifest();

std::vector<std::string> catalog_names();

}  // namespace pdsde
