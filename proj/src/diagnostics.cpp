#include "pdsde/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "pdsde/rng.hpp"
#include "pdsde/scheme.hpp"

namespace pdsde {

std::string DiagnosticReport::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["check_id"] = check_id;
    j["verdict"] = verdict;
    if (!notes.empty()) j["notes"] = notes;
    j["stats"] = stats;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) j["rows"].push_back(r);
    return j.dump(2);
}

DiagnosticReport displacement_scaling(const SdeModel& model, int p, const std::vector<int>& levels,
                                      double T, long n_paths, std::uint64_t seed,
                                      DisplacementOp op, double bound_factor, int fine_mult) {
    if (p < 2) throw std::invalid_argument("displacement_scaling: p >= 2 required");
    if (levels.empty()) throw std::invalid_argument("displacement_scaling: empty level list");
    if (model.memory == MemoryKind::Infinite)
        throw std::invalid_argument("displacement_scaling: finite-memory models only");

    const int M_fine = fine_mult * levels.back();
    const double dlt_fine = model.tau / M_fine;
    const long n_fine = std::llround(T / dlt_fine);
    if (n_fine < 1 || std::fabs(n_fine * dlt_fine - T) > 1e-9 * std::max(1.0, T))
        throw std::invalid_argument("displacement_scaling: T must be a whole number of fine steps");
    for (int M : levels)
        if (M_fine % (2 * M) != 0)
            throw std::invalid_argument("displacement_scaling: fine grid must resolve half-steps of every level");

    SdeModel ref = reference_model(model);
    const int L = static_cast<int>(levels.size());
    const int W = M_fine;  // fine nodes per memory window
    const double exponent = op == DisplacementOp::Interpolated ? (p - 2) / 2.0 : p / 2.0;

    std::vector<double> vals(static_cast<std::size_t>(L) * n_paths, 0.0);
    parallel_paths(n_paths, [&](long pi) {
        BrownianPath bp = sample_brownian(seed, static_cast<std::uint64_t>(pi), model.d,
                                          static_cast<int>(n_fine), dlt_fine);
        Trajectory traj = simulate(ref, default_scheme(ref), M_fine, T, bp);
        for (int l = 0; l < L; ++l) {
            const int factor = M_fine / levels[l];
            const int it = static_cast<int>(n_fine) - factor / 2;  // t = T - delta/2
            const int ia = it - factor / 2;                        // t_delta = T - delta
            double sup = 0.0;
            if (op == DisplacementOp::Truncated) {
                for (int j = 0; j <= W; ++j) {
                    int idx = it - W + j;
                    double dv = 0.0;
                    const double* a = traj.at(idx);
                    const double* b = traj.at(std::min(idx, ia));
                    for (int c = 0; c < model.d; ++c) dv += (a[c] - b[c]) * (a[c] - b[c]);
                    sup = std::max(sup, dv);
                }
            } else {
                const int base = ia - levels[l] * factor;  // oldest coarse node (fine index)
                for (int j = 0; j <= W; ++j) {
                    int idx = it - W + j;       // exact segment node Y(t + theta)
                    int rel = ia - W + j - base;  // same theta under the anchor t_delta
                    int m = rel / factor;
                    int remainder = rel - m * factor;
                    double frac = static_cast<double>(remainder) / factor;
                    const double* a = traj.at(idx);
                    const double* lo = traj.at(base + m * factor);
                    const double* hi = remainder ? traj.at(base + (m + 1) * factor) : lo;
                    double dv = 0.0;
                    for (int c = 0; c < model.d; ++c) {
                        double interp = (1.0 - frac) * lo[c] + frac * hi[c];
                        double e = a[c] - interp;
                        dv += e * e;
                    }
                    sup = std::max(sup, dv);
                }
            }
            vals[static_cast<std::size_t>(l) * n_paths + pi] = std::pow(sup, p / 2.0);
        }
    });

    DiagnosticReport rep;
    rep.check_id = op == DisplacementOp::Interpolated ? "displacement-interpolated"
                                                      : "displacement-truncated";
    rep.stats["p"] = p;
    rep.stats["exponent"] = exponent;
    rep.stats["fine_M"] = M_fine;
    rep.stats["n_paths"] = static_cast<double>(n_paths);

    bool inconclusive = false, all_zero = true;
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (int l = 0; l < L; ++l) {
        double s = 0.0, s2 = 0.0;
        for (long pi = 0; pi < n_paths; ++pi) {
            double v = vals[static_cast<std::size_t>(l) * n_paths + pi];
            s += v;
            s2 += v * v;
        }
        double mean = s / n_paths;
        double var = n_paths > 1 ? (s2 - n_paths * mean * mean) / (n_paths - 1) : 0.0;
        double se = std::sqrt(std::max(0.0, var) / n_paths);
        double dlt = model.tau / levels[l];
        double ratio = mean / std::pow(dlt, exponent);
        if (mean > 0.0) {
            all_zero = false;
            rmin = std::min(rmin, ratio);
            rmax = std::max(rmax, ratio);
            if (se > 0.5 * mean) inconclusive = true;
        }
        rep.rows.push_back({{"M", static_cast<double>(levels[l])},
                            {"delta", dlt},
                            {"moment", mean},
                            {"stderr", se},
                            {"ratio", ratio}});
    }
    if (all_zero) {
        rep.verdict = "pass";
        rep.notes = "displacement identically zero";
    } else if (inconclusive) {
        rep.verdict = "inconclusive";
        rep.notes = "stderr above 50% of the mean at some level";
    } else {
        rep.stats["ratio_spread"] = rmax / rmin;
        rep.verdict = rmax / rmin < bound_factor ? "pass" : "fail";
    }
    return rep;
}

DiagnosticReport lyapunov_bounds_check(double alpha, double beta, double gamma, long n_samples,
                                       std::uint64_t seed) {
    if (!(alpha > 0.0 && beta > 0.0))
        throw std::invalid_argument("lyapunov_bounds_check: alpha, beta must be positive");
    if (!(gamma > -alpha * beta && gamma < alpha * beta))
        throw std::invalid_argument("lyapunov_bounds_check: gamma outside (-alpha*beta, alpha*beta)");

    const double k1 = 0.5 * (1.0 + alpha) * (1.0 + beta);
    const double k2p = printed_kappa2(alpha, beta, gamma);
    // exact extreme eigenvalues of the quadratic form W
    double tr = 0.5 * (alpha + beta);  // alpha/2 + beta/2
    double half_diff = 0.25 * (alpha - beta);
    double disc = std::sqrt(half_diff * half_diff + 0.25 * gamma * gamma);
    double lmin = 0.5 * tr - disc;
    double lmax = 0.5 * tr + disc;

    NormalStream rng(seed, 0xd5);
    long upper_viol = 0, printed_viol = 0, exact_viol = 0;
    for (long i = 0; i < n_samples; ++i) {
        double scale = std::exp(2.0 * rng.normal());
        double x = scale * rng.normal();
        double y = scale * rng.normal();
        double n2 = x * x + y * y;
        double w = 0.5 * alpha * x * x + 0.5 * beta * y * y + gamma * x * y;
        double tol = 1e-12 * (1.0 + std::fabs(w) + n2);
        if (w > k1 * n2 + tol) ++upper_viol;
        if (w < k2p * n2 - tol) ++printed_viol;
        if (w < lmin * n2 - tol) ++exact_viol;
    }

    DiagnosticReport rep;
    rep.check_id = "lyapunov-sandwich";
    rep.stats["kappa1"] = k1;
    rep.stats["kappa2_printed"] = k2p;
    rep.stats["lambda_min"] = lmin;
    rep.stats["lambda_max"] = lmax;
    rep.stats["n_samples"] = static_cast<double>(n_samples);
    rep.stats["upper_violations"] = static_cast<double>(upper_viol);
    rep.stats["printed_lower_violations"] = static_cast<double>(printed_viol);
    rep.stats["exact_lower_violations"] = static_cast<double>(exact_viol);

    bool discrepancy = k2p <= 0.0 || k2p > lmin + 1e-12;
    rep.stats["printed_discrepancy"] = discrepancy ? 1.0 : 0.0;
    if (lmin <= 0.0) {
        rep.verdict = "fail";
        rep.notes = "quadratic form not positive definite: no positive kappa_2 exists here";
    } else if (upper_viol > 0 || exact_viol > 0) {
        rep.verdict = "fail";
    } else {
        rep.verdict = "pass";
        if (discrepancy)
            rep.notes = k2p <= 0.0
                            ? "printed kappa_2 formula is non-positive here; exact lower constant used"
                            : "printed kappa_2 formula exceeds the exact smallest eigenvalue here";
    }
    return rep;
}

namespace {

// Composite Simpson of f on [-R, R] with n nodes (n odd).
double simpson(double R, int n, const std::function<double(double)>& f) {
    if (n % 2 == 0) ++n;
    double h = 2.0 * R / (n - 1);
    double s = f(-R) + f(R);
    for (int i = 1; i < n - 1; ++i) s += f(-R + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double simpson2(double R, int n, const std::function<double(double, double)>& f) {
    if (n % 2 == 0) ++n;
    auto inner = [&](double x) {
        return simpson(R, n, [&](double y) { return f(x, y); });
    };
    return simpson(R, n, inner);
}

}  // namespace

Mu0Result mu0_integrability(const SdeModel& model, double kappa, int grid_n) {
    if (model.d > 2)
        throw std::invalid_argument("mu0_integrability: quadrature supports d <= 2 only");

    auto density = [&](const Vec& x) { return std::exp(-model.potential_V(x)); };
    auto weighted = [&](const Vec& x) {
        Vec z = model.z_point(x);
        return std::exp(kappa * dot(z, z) - model.potential_V(x));
    };

    Mu0Result out;
    double prev_num = 0.0, prev_den = 0.0;
    bool have_prev = false;
    for (double R = 4.0; R <= 1024.0; R *= 2.0) {
        int n = model.d == 1 ? grid_n : 401;
        double num, den, edge;
        if (model.d == 1) {
            num = simpson(R, n, [&](double x) { return weighted({x}); });
            den = simpson(R, n, [&](double x) { return density({x}); });
            edge = weighted({R});
        } else {
            num = simpson2(R, n, [&](double x, double y) { return weighted({x, y}); });
            den = simpson2(R, n, [&](double x, double y) { return density({x, y}); });
            edge = weighted({R, R});
        }
        out.domain_R = R;
        if (!std::isfinite(num) || num / den > 1e12) {
            out.diverged = true;
            out.notes = "integrand grows beyond the configured envelope";
            return out;
        }
        if (have_prev) {
            double rel = std::fabs(num / den - prev_num / prev_den) /
                         std::max(1e-300, std::fabs(num / den));
            if (rel < 1e-10 && edge < 1e-12 * num / (2.0 * R)) {
                out.value = num / den;
                return out;
            }
        }
        prev_num = num;
        prev_den = den;
        have_prev = true;
    }
    // never stabilized: growing integrand means a divergent exponential moment
    out.diverged = true;
    out.notes = "no stabilization across domain doublings";
    return out;
}

DiagnosticReport exponential_moment_sweep(const SdeModel& model, QKind q, double T, int M,
                                          const std::vector<double>& lambdas, long n_paths,
                                          std::uint64_t seed) {
    DiagnosticReport rep;
    rep.check_id = "exponential-moment-sweep";
    NovikovThreshold thr = novikov_threshold(model, q, T);
    rep.stats["lambda_threshold"] = thr.lambda_max;
    rep.notes = "threshold formula: " + thr.formula_id;

    bool any_below = false, below_ok = true;
    for (double lm : lambdas) {
        NovikovReport r = novikov_margin(model, q, T, M, n_paths, seed, lm);
        rep.rows.push_back({{"lambda", lm},
                            {"mean", r.mean},
                            {"stderr", r.se},
                            {"max_sample", r.max_sample},
                            {"unbounded", r.empirically_unbounded ? 1.0 : 0.0},
                            {"below_threshold", lm < thr.lambda_max ? 1.0 : 0.0}});
        if (lm < thr.lambda_max) {
            any_below = true;
            if (r.empirically_unbounded || !std::isfinite(r.mean)) below_ok = false;
        }
    }
    if (!any_below)
        rep.verdict = "inconclusive";
    else
        rep.verdict = below_ok ? "pass" : "fail";
    return rep;
}

}  // namespace pdsde
