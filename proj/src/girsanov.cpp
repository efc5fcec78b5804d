#include "pdsde/girsanov.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pdsde {

SdeModel reference_model(const SdeModel& model) {
    SdeModel ref = model;
    ref.zkind = FunctionalKind::None;
    return ref;
}

namespace {

void check_variant(const SdeModel& model, PerturbationVariant v) {
    bool ok = false;
    switch (v) {
        case PerturbationVariant::H1:
        case PerturbationVariant::H2: ok = model.memory == MemoryKind::Finite; break;
        case PerturbationVariant::H3: ok = model.memory == MemoryKind::Infinite; break;
        case PerturbationVariant::H4: ok = model.memory == MemoryKind::Distributed; break;
    }
    if (!ok) throw std::invalid_argument("perturbation_h: variant does not match the model memory kind");
}

Vec functional_at(const SdeModel& model, const Trajectory& traj, int k, SegmentKind skind) {
    SegmentPath seg;
    if (model.memory == MemoryKind::Infinite) {
        seg = grid_segment(traj.view(), k, traj.n_hist, traj.n_hist * traj.delta(),
                           SegmentKind::InfiniteWeighted, model.rate_r);
    } else {
        seg = grid_segment(traj.view(), k, traj.M, model.tau, skind);
    }
    if (model.is_hamiltonian()) {
        SegmentPath sy = grid_segment(traj.yview(), k, traj.M, model.tau, skind);
        return evaluate_functional_drift_pair(model, seg, sy);
    }
    return evaluate_functional_drift(model, seg);
}

}  // namespace

Vec perturbation_h(const SdeModel& model, const Trajectory& traj, PerturbationVariant variant,
                   int t_idx) {
    check_variant(model, variant);
    if (t_idx < 0 || t_idx > traj.n_steps)
        throw std::out_of_range("perturbation_h: grid index out of range");
    SegmentKind skind = variant == PerturbationVariant::H1 ? SegmentKind::LinearInterp
                                                           : SegmentKind::LeftTruncated;
    Vec z = functional_at(model, traj, t_idx, skind);
    // b(Y(t)) - b(Y(t_delta)) vanishes at grid anchors (t = t_delta), so the
    // mismatch reduces to the negated functional drift.
    Vec h(model.d, 0.0);
    for (int c = 0; c < model.d; ++c) z[c] = -z[c];
    model.sigma_inv.apply_inplace(z.data(), h.data());
    return h;
}

GirsanovWeight weight_along_path(const SdeModel& model, const Trajectory& traj,
                                 const BrownianPath& bp, WeightVariant variant) {
    (void)variant;  // R1 and R2 use the same grid integrand (see header)
    const int n = traj.n_steps;
    const double dlt = traj.delta();
    if (n > 0 && bp.n_fine % n != 0)
        throw std::invalid_argument("weight_along_path: Brownian table does not match the grid");
    int factor = n > 0 ? bp.n_fine / n : 1;

    DriftEvaluator evx(model, traj.M, traj.n_hist, dlt);
    DriftEvaluator evy(model, traj.M, traj.n_hist, dlt);
    for (int j = -traj.n_hist; j <= 0; ++j) {
        evx.push(j, traj.at(j));
        if (model.is_hamiltonian()) evy.push(j, traj.yat(j));
    }

    PathView pv = traj.view();
    GirsanovWeight w;
    Vec z(model.d, 0.0), g(model.d, 0.0), dW(model.d, 0.0);
    for (int k = 0; k < n; ++k) {
        if (model.is_hamiltonian()) {
            std::fill(z.begin(), z.end(), 0.0);
            z[0] = model.zc * (holder_scalar(evx.window_sup(k), model.k.alpha) +
                               holder_scalar(evy.window_sup(k), model.k.alpha));
        } else {
            evx.drift(pv, k, z);
        }
        model.sigma_inv.apply_inplace(z.data(), g.data());

        std::fill(dW.begin(), dW.end(), 0.0);
        for (int j = 0; j < factor; ++j) {
            const double* r = bp.row(k * factor + j);
            for (int c = 0; c < model.d; ++c) dW[c] += r[c];
        }
        double gw = 0.0, g2 = 0.0;
        for (int c = 0; c < model.d; ++c) {
            gw += g[c] * dW[c];
            g2 += g[c] * g[c];
        }
        w.stochastic_integral += gw;
        w.quadratic_variation_half += 0.5 * g2 * dlt;

        evx.push(k + 1, traj.at(k + 1));
        if (model.is_hamiltonian()) evy.push(k + 1, traj.yat(k + 1));
    }
    w.log_weight = w.stochastic_integral - w.quadratic_variation_half;
    w.finite = std::isfinite(w.log_weight);
    return w;
}

ImportanceEstimate importance_sampled_expectation(const SdeModel& model, const Payoff& payoff,
                                                  double T, int M, long n_paths,
                                                  std::uint64_t seed, WeightVariant variant) {
    if (n_paths < 100)
        throw std::invalid_argument("importance_sampled_expectation: n_paths >= 100 required");
    double dlt = model.tau / M;
    long n_steps = std::llround(T / dlt);
    if (n_steps < 1 || std::fabs(n_steps * dlt - T) > 1e-9 * std::max(1.0, T))
        throw std::invalid_argument("importance_sampled_expectation: T*M/tau must be an integer");

    SdeModel ref = reference_model(model);
    SchemeKind kind = default_scheme(ref);

    std::vector<double> wf(n_paths, 0.0), ws(n_paths, 0.0);
    std::vector<unsigned char> ok(n_paths, 0), capped(n_paths, 0);
    parallel_paths(n_paths, [&](long p) {
        BrownianPath bp = sample_brownian(seed, static_cast<std::uint64_t>(p), model.d,
                                          static_cast<int>(n_steps), dlt);
        Trajectory traj = simulate(ref, kind, M, T, bp);
        GirsanovWeight gw = weight_along_path(model, traj, bp, variant);
        double f = payoff(traj.at(traj.n_steps));
        if (!gw.finite || !std::isfinite(f)) return;
        double lw = gw.log_weight;
        if (lw > kLogWeightCap) {
            lw = kLogWeightCap;
            capped[p] = 1;
        }
        double wgt = std::exp(lw);
        wf[p] = wgt * f;
        ws[p] = wgt;
        ok[p] = 1;
    });

    double s = 0.0, s2 = 0.0, sw = 0.0, sw2 = 0.0;
    long n_ok = 0, n_cap = 0;
    for (long p = 0; p < n_paths; ++p) {
        if (capped[p]) ++n_cap;
        if (!ok[p]) continue;
        s += wf[p];
        s2 += wf[p] * wf[p];
        sw += ws[p];
        sw2 += ws[p] * ws[p];
        ++n_ok;
    }
    ImportanceEstimate out;
    out.n_flagged = n_paths - n_ok;
    out.cap_count = n_cap;
    out.cap_rate = n_paths > 0 ? static_cast<double>(n_cap) / n_paths : 0.0;
    out.estimate.n_paths = n_ok;
    out.estimate.n_flagged = out.n_flagged;
    out.estimate.unreliable = out.n_flagged * 100 > n_paths;
    out.estimate.payoff_id = payoff.id();
    out.estimate.model_id = model.name;
    out.estimate.scheme_id = variant == WeightVariant::R1 ? "is-r1" : "is-r2";
    out.estimate.T = T;
    out.estimate.M = M;
    if (n_ok > 0) {
        out.estimate.mean = s / n_ok;
        out.weight_mean = sw / n_ok;
    }
    if (n_ok > 1) {
        double var = (s2 - n_ok * out.estimate.mean * out.estimate.mean) / (n_ok - 1);
        out.estimate.se = std::sqrt(std::max(0.0, var) / n_ok);
        double wvar = (sw2 - n_ok * out.weight_mean * out.weight_mean) / (n_ok - 1);
        out.weight_se = std::sqrt(std::max(0.0, wvar) / n_ok);
    }
    return out;
}

NovikovThreshold novikov_threshold(const SdeModel& model, QKind q, double T) {
    const ModelConstants& k = model.k;
    const double inf = std::numeric_limits<double>::infinity();
    double s2 = model.sigma_hs * model.sigma_hs;
    double si2 = model.sigma_inv_hs * model.sigma_inv_hs;
    NovikovThreshold out;
    auto ratio = [&](double num, double den) { return den > 0.0 ? num / den : inf; };
    switch (q) {
        case QKind::SegmentNormSq:
            out.formula_id = "eq11";
            out.lambda_max = ratio(std::exp(-(1.0 + k.beta * T)), 2.0 * s2 * T * T);
            break;
        case QKind::SigmaInvZSq: {
            if (model.memory == MemoryKind::Distributed) {
                out.formula_id = "e4";
                out.lambda_max = ratio(k.kappa, std::max(1.0, model.d / 2.0) * T);
                break;
            }
            double hc = model.memory == MemoryKind::Infinite ? k.L4 : k.L2;
            double bracket = k.alpha == 1.0 ? hc * hc : 0.0;
            out.formula_id = "eq12";
            out.lambda_max = ratio(std::exp(-(1.0 + k.beta * T)), 2.0 * s2 * si2 * bracket * T * T);
            break;
        }
        case QKind::PerturbationSq: {
            if (model.memory == MemoryKind::Distributed) {
                out.formula_id = "e6";
                double c1 = ratio(k.kappa, 2.0 * std::max(2.0, static_cast<double>(model.d)) * si2 * T * T);
                double c2 = ratio(std::exp(-(1.0 + k.beta * T)), 32.0 * s2 * si2 * k.L0 * k.L0 * T * T);
                out.lambda_max = std::min(c1, c2);
                break;
            }
            double hc = model.memory == MemoryKind::Infinite ? k.L4 : k.L2;
            double bracket = k.alpha == 1.0 ? 4.0 * k.L1 * k.L1 + hc * hc : k.L1 * k.L1;
            out.formula_id = "w12";
            out.lambda_max = ratio(std::exp(-(1.0 + k.beta * T)), 4.0 * s2 * si2 * bracket * T * T);
            break;
        }
        case QKind::PairNormSq: {
            if (!model.is_hamiltonian())
                throw std::invalid_argument("novikov_threshold: pair norm needs a Hamiltonian model");
            out.formula_id = "d11-as-printed";
            double k2 = printed_kappa2(k.alpha_d3, k.beta_d3, k.gamma_d3);
            double k3 = std::max(k.gamma_d3 * k.gamma_d3, k.beta_d3 * k.beta_d3);
            // lambda appears on both sides; smallest positive root of
            // lambda*k3*s2*T^2 = k2*exp(lambda*k2*T - 1), scan + bisection
            auto holds = [&](double lm) { return lm * k3 * s2 * T * T < k2 * std::exp(lm * k2 * T - 1.0); };
            double lo = 0.0, hi = -1.0;
            for (int i = 1; i <= 4000; ++i) {
                double lm = 1e-6 * std::pow(1e12, i / 4000.0);
                if (holds(lm))
                    lo = lm;
                else {
                    hi = lm;
                    break;
                }
            }
            if (hi < 0.0) {
                out.lambda_max = inf;
            } else {
                for (int it = 0; it < 80; ++it) {
                    double mid = 0.5 * (lo + hi);
                    (holds(mid) ? lo : hi) = mid;
                }
                out.lambda_max = lo;
            }
            break;
        }
    }
    return out;
}

NovikovReport novikov_margin(const SdeModel& model, QKind q, double T, int M, long n_paths,
                             std::uint64_t seed, double lambda) {
    if (q == QKind::PairNormSq && !model.is_hamiltonian())
        throw std::invalid_argument("novikov_margin: pair norm needs a Hamiltonian model");
    double dlt = model.tau / M;
    long n_steps = std::llround(T / dlt);
    if (n_steps < 1 || std::fabs(n_steps * dlt - T) > 1e-9 * std::max(1.0, T))
        throw std::invalid_argument("novikov_margin: T*M/tau must be an integer");

    SdeModel ref = reference_model(model);
    SchemeKind kind = default_scheme(ref);

    std::vector<double> samples(n_paths, 0.0);
    std::vector<unsigned char> ok(n_paths, 0);
    parallel_paths(n_paths, [&](long p) {
        BrownianPath bp = sample_brownian(seed, static_cast<std::uint64_t>(p), model.d,
                                          static_cast<int>(n_steps), dlt);
        Trajectory traj = simulate(ref, kind, M, T, bp);
        PathView pv = traj.view();

        DriftEvaluator evz(model, traj.M, traj.n_hist, dlt);
        SlidingMax smx(traj.M + 1), smy(traj.M + 1);
        for (int j = -traj.n_hist; j <= 0; ++j) {
            if (q == QKind::SigmaInvZSq || q == QKind::PerturbationSq) evz.push(j, traj.at(j));
            if (q == QKind::SegmentNormSq || q == QKind::PairNormSq)
                smx.push(j, norm2(traj.at(j), model.d));
            if (q == QKind::PairNormSq) smy.push(j, norm2(traj.yat(j), model.d));
        }

        Vec z(model.d, 0.0), g(model.d, 0.0);
        double integral = 0.0;
        for (int k = 0; k <= traj.n_steps; ++k) {
            double qv = 0.0;
            switch (q) {
                case QKind::SegmentNormSq: {
                    double m = smx.max();
                    qv = m * m;
                    break;
                }
                case QKind::PairNormSq: {
                    double mx = smx.max(), my = smy.max();
                    qv = mx * mx + my * my;
                    break;
                }
                case QKind::SigmaInvZSq:
                case QKind::PerturbationSq: {
                    if (model.is_hamiltonian()) {
                        std::fill(z.begin(), z.end(), 0.0);
                        z[0] = model.zc * (holder_scalar(smx.max(), model.k.alpha) +
                                           holder_scalar(smy.max(), model.k.alpha));
                    } else {
                        evz.drift(pv, k, z);
                    }
                    model.sigma_inv.apply_inplace(z.data(), g.data());
                    for (int c = 0; c < model.d; ++c) qv += g[c] * g[c];
                    break;
                }
            }
            double w = (k == 0 || k == traj.n_steps) ? 0.5 : 1.0;
            integral += w * qv * dlt;
            if (k < traj.n_steps) {
                if (q == QKind::SigmaInvZSq || q == QKind::PerturbationSq)
                    evz.push(k + 1, traj.at(k + 1));
                if (q == QKind::SegmentNormSq || q == QKind::PairNormSq)
                    smx.push(k + 1, norm2(traj.at(k + 1), model.d));
                if (q == QKind::PairNormSq) smy.push(k + 1, norm2(traj.yat(k + 1), model.d));
            }
        }
        samples[p] = std::exp(lambda * integral);
        ok[p] = 1;
    });

    NovikovReport rep;
    rep.lambda = lambda;
    rep.threshold = novikov_threshold(model, q, T);
    rep.n_paths = n_paths;
    double s = 0.0, s2 = 0.0;
    long n_ok = 0;
    for (long p = 0; p < n_paths; ++p) {
        if (!ok[p]) continue;
        double v = samples[p];
        if (!std::isfinite(v)) {
            rep.empirically_unbounded = true;
            continue;
        }
        rep.max_sample = std::max(rep.max_sample, v);
        s += v;
        s2 += v * v;
        ++n_ok;
    }
    if (n_ok > 0) rep.mean = s / n_ok;
    if (n_ok > 1) {
        double var = (s2 - n_ok * rep.mean * rep.mean) / (n_ok - 1);
        rep.se = std::sqrt(std::max(0.0, var) / n_ok);
    }
    return rep;
}

}  // namespace pdsde
