#include "pdsde/scheme.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace pdsde {

const char* scheme_name(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::EmInterpolated: return "interp";
        case SchemeKind::TruncatedEm: return "trunc";
        case SchemeKind::Hamiltonian: return "hamiltonian";
        case SchemeKind::HamiltonianEulerX: return "hamiltonian-eulerx";
    }
    return "?";
}

SchemeKind default_scheme(const SdeModel& model) {
    return model.is_hamiltonian() ? SchemeKind::Hamiltonian : SchemeKind::TruncatedEm;
}

namespace {

int ring_slot(int idx, int w) { return ((idx % w) + w) % w; }

// Value of the path at lag `lag_steps` (possibly fractional) behind anchor k,
// matching interpolate_segment's weights.
void lagged_value(const PathView& path, int k, double lag_steps, int d, Vec& out) {
    int io = static_cast<int>(std::floor(lag_steps + 1e-9));
    double frac = lag_steps - io;
    if (frac < 1e-9) frac = 0.0;
    if (frac > 1.0 - 1e-9) {
        ++io;
        frac = 0.0;
    }
    const double* a = path.at(k - io);
    if (frac == 0.0) {
        for (int c = 0; c < d; ++c) out[c] = a[c];
    } else {
        const double* b = path.at(k - io - 1);
        for (int c = 0; c < d; ++c) out[c] = (1.0 - frac) * a[c] + frac * b[c];
    }
}

}  // namespace

DriftEvaluator::DriftEvaluator(const SdeModel& model, int M, int n_hist, double dlt)
    : model_(model),
      M_(M),
      n_hist_(n_hist),
      dlt_(dlt),
      window_nodes_(model.zkind == FunctionalKind::ExpWeighted ? n_hist + 1 : M + 1),
      smax_(window_nodes_),
      scratch_(model.d, 0.0) {
    if (model_.zkind == FunctionalKind::Distributed && model_.rho.uniform) {
        zring_.assign(static_cast<std::size_t>(window_nodes_) * model_.d, 0.0);
        zsum_.assign(model_.d, 0.0);
    }
}

void DriftEvaluator::push(int idx, const double* v) {
    switch (model_.zkind) {
        case FunctionalKind::SupNorm:
            smax_.push(idx, norm2(v, model_.d));
            break;
        case FunctionalKind::ExpWeighted:
            smax_.push(idx, std::exp(model_.rate_r * (idx * dlt_)) * norm2(v, model_.d));
            break;
        case FunctionalKind::Distributed: {
            if (!model_.rho.uniform) break;
            Vec x(v, v + model_.d);
            Vec z = model_.z_point(x);
            double* slot = zring_.data() + static_cast<std::size_t>(ring_slot(idx, window_nodes_)) * model_.d;
            // entries older than one window have already left the sum exactly once
            if (idx >= -n_hist_ + window_nodes_)
                for (int c = 0; c < model_.d; ++c) zsum_[c] -= slot[c];
            for (int c = 0; c < model_.d; ++c) {
                zsum_[c] += z[c];
                slot[c] = z[c];
            }
            break;
        }
        default:
            break;
    }
}

double DriftEvaluator::window_sup(int k) const {
    if (model_.zkind == FunctionalKind::ExpWeighted)
        return smax_.max() * std::exp(-model_.rate_r * (k * dlt_));
    (void)k;
    return smax_.max();
}

void DriftEvaluator::drift(const PathView& path, int k, Vec& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    switch (model_.zkind) {
        case FunctionalKind::None:
            break;
        case FunctionalKind::PointDelay: {
            Vec& v = const_cast<Vec&>(scratch_);
            lagged_value(path, k, model_.zlag / dlt_, model_.d, v);
            out[0] = model_.zc * holder_scalar(norm2(v), model_.k.alpha);
            break;
        }
        case FunctionalKind::SupNorm:
        case FunctionalKind::ExpWeighted:
            out[0] = model_.zc * holder_scalar(window_sup(k), model_.k.alpha);
            break;
        case FunctionalKind::Distributed: {
            if (model_.rho.uniform) {
                const double w = dlt_ / model_.tau;
                const double* zold =
                    zring_.data() + static_cast<std::size_t>(ring_slot(k - M_, window_nodes_)) * model_.d;
                const double* znew =
                    zring_.data() + static_cast<std::size_t>(ring_slot(k, window_nodes_)) * model_.d;
                for (int c = 0; c < model_.d; ++c)
                    out[c] = w * (zsum_[c] - 0.5 * zold[c] - 0.5 * znew[c]);
            } else {
                Vec& v = const_cast<Vec&>(scratch_);
                for (const auto& [theta, weight] : model_.rho.atoms) {
                    lagged_value(path, k, -theta / dlt_, model_.d, v);
                    Vec z = model_.z_point(v);
                    for (int c = 0; c < model_.d; ++c) out[c] += weight * z[c];
                }
            }
            break;
        }
        case FunctionalKind::PairPointDelay:
            throw std::logic_error("DriftEvaluator: pair kind handled by the caller");
    }
}

namespace {

SegmentPath anchored_segment(const SdeModel& model, const PathView& path, int k, int M,
                             double dlt) {
    if (model.zkind == FunctionalKind::ExpWeighted) {
        int w = static_cast<int>(std::llround(model.t_hist / dlt));
        return grid_segment(path, k, w, w * dlt, SegmentKind::InfiniteWeighted, model.rate_r);
    }
    return grid_segment(path, k, M, model.tau,
                        model.memory == MemoryKind::Finite ? SegmentKind::LinearInterp
                                                           : SegmentKind::LeftTruncated);
}

Vec euler_next(const SdeModel& model, const double* x, const Vec& z, double dlt,
               const double* dW) {
    Vec g(model.d, 0.0);
    model.B.apply_inplace(x, g.data());
    Vec sdW(model.d, 0.0);
    model.sigma.apply_inplace(dW, sdW.data());
    Vec next(model.d, 0.0);
    for (int c = 0; c < model.d; ++c) next[c] = x[c] + (g[c] + z[c]) * dlt + sdW[c];
    return next;
}

}  // namespace

Vec em_interpolated_step(const SdeModel& model, const Trajectory& traj, int k, const double* dW) {
    if (model.memory != MemoryKind::Finite)
        throw std::invalid_argument("em_interpolated_step: finite-memory models only");
    if (k < 0 || k >= traj.n_steps + 1)
        throw std::out_of_range("em_interpolated_step: step index out of range");
    SegmentPath seg = grid_segment(traj.view(), k, traj.M, model.tau, SegmentKind::LinearInterp);
    Vec z = evaluate_functional_drift(model, seg);
    return euler_next(model, traj.at(k), z, traj.delta(), dW);
}

Vec truncated_em_step(const SdeModel& model, const Trajectory& traj, int k, const double* dW) {
    if (model.is_hamiltonian())
        throw std::invalid_argument("truncated_em_step: use hamiltonian_step");
    if (k < 0 || k >= traj.n_steps + 1)
        throw std::out_of_range("truncated_em_step: step index out of range");
    SegmentPath seg = anchored_segment(model, traj.view(), k, traj.M, traj.delta());
    Vec z = evaluate_functional_drift(model, seg);
    return euler_next(model, traj.at(k), z, traj.delta(), dW);
}

std::pair<Vec, Vec> hamiltonian_step(const SdeModel& model, const Trajectory& traj, int k,
                                     const double* dW, bool euler_x) {
    if (!model.is_hamiltonian())
        throw std::invalid_argument("hamiltonian_step: Hamiltonian models only");
    if (k < 0 || k >= traj.n_steps + 1)
        throw std::out_of_range("hamiltonian_step: step index out of range");
    double dlt = traj.delta();
    SegmentPath sx = grid_segment(traj.view(), k, traj.M, model.tau, SegmentKind::LeftTruncated);
    SegmentPath sy = grid_segment(traj.yview(), k, traj.M, model.tau, SegmentKind::LeftTruncated);
    Vec z = evaluate_functional_drift_pair(model, sx, sy);
    Vec xk(traj.at(k), traj.at(k) + model.d);
    Vec yk(traj.yat(k), traj.yat(k) + model.d);
    Vec g = model.drift_b2(xk, yk);
    for (int c = 0; c < model.d; ++c) g[c] += z[c];
    Vec sdW(model.d, 0.0);
    model.sigma.apply_inplace(dW, sdW.data());

    Vec ynext(model.d, 0.0);
    for (int c = 0; c < model.d; ++c) ynext[c] = yk[c] + g[c] * dlt + sdW[c];

    Vec xnext(model.d, 0.0);
    if (euler_x) {
        for (int c = 0; c < model.d; ++c) xnext[c] = xk[c] + (xk[c] + yk[c]) * dlt;
    } else {
        // variation of constants for dX = (X + Y)dt with Y linear-in-t over
        // the step; stochastic convolution taken as sigma*dW*(e^dlt - 1)/dlt
        double ed = std::exp(dlt);
        double c1 = ed - 1.0;
        double c2 = ed - 1.0 - dlt;
        double cs = c1 / dlt;
        for (int c = 0; c < model.d; ++c)
            xnext[c] = ed * xk[c] + c1 * yk[c] + c2 * g[c] + cs * sdW[c];
    }
    return {std::move(xnext), std::move(ynext)};
}

Trajectory simulate(const SdeModel& model, SchemeKind kind, int M, double T,
                    const BrownianPath& bp) {
    bool ham_kind = (kind == SchemeKind::Hamiltonian || kind == SchemeKind::HamiltonianEulerX);
    if (ham_kind != model.is_hamiltonian())
        throw std::invalid_argument("simulate: scheme kind does not match the model memory kind");
    if (kind == SchemeKind::EmInterpolated && model.memory != MemoryKind::Finite)
        throw std::invalid_argument("simulate: interpolated EM needs finite memory");
    if (M < 1) throw std::invalid_argument("simulate: M must be positive");
    if (bp.d != model.d) throw std::invalid_argument("simulate: Brownian dimension mismatch");

    const double dlt = model.tau / M;
    long n_steps = std::llround(T / dlt);
    if (n_steps < 0 || std::fabs(n_steps * dlt - T) > 1e-9 * std::max(1.0, T))
        throw std::invalid_argument("simulate: T must be a whole number of steps (T*M/tau integer)");
    int factor = 1;
    if (n_steps > 0) {
        if (bp.n_fine % n_steps != 0)
            throw std::invalid_argument("simulate: Brownian table does not cover the grid dyadically");
        factor = static_cast<int>(bp.n_fine / n_steps);
        if (std::fabs(factor * bp.dt_fine - dlt) > 1e-9 * dlt)
            throw std::invalid_argument("simulate: Brownian stepsize mismatch");
    }

    int n_hist = M;
    if (model.memory == MemoryKind::Infinite) {
        n_hist = static_cast<int>(std::llround(model.t_hist / dlt));
        if (model.rate_r * (model.t_hist + T) > 600.0)
            throw std::invalid_argument("simulate: exp-weighted window overflows double range");
    }

    Trajectory traj;
    traj.tau = model.tau;
    traj.M = M;
    traj.d = model.d;
    traj.n_hist = n_hist;
    traj.n_steps = static_cast<int>(n_steps);
    traj.x.resize(static_cast<std::size_t>(n_hist + n_steps + 1) * model.d);
    if (ham_kind) traj.y.resize(traj.x.size());

    for (int j = -n_hist; j <= 0; ++j) {
        double theta = j * dlt;
        if (model.memory != MemoryKind::Infinite && theta < -model.tau) theta = -model.tau;
        Vec v = model.initial(theta);
        std::memcpy(traj.at(j), v.data(), sizeof(double) * model.d);
        if (ham_kind) {
            Vec w = model.initial2(theta);
            std::memcpy(traj.yat(j), w.data(), sizeof(double) * model.d);
        }
    }

    DriftEvaluator evx(model, M, n_hist, dlt);
    DriftEvaluator evy(model, M, n_hist, dlt);  // Hamiltonian second component
    PathView pv = traj.view();
    PathView pvy = traj.yview();
    for (int j = -n_hist; j <= 0; ++j) {
        evx.push(j, traj.at(j));
        if (ham_kind) evy.push(j, traj.yat(j));
    }

    const bool euler_x = (kind == SchemeKind::HamiltonianEulerX);
    const double ed = std::exp(dlt);
    const double hc1 = ed - 1.0;
    const double hc2 = ed - 1.0 - dlt;
    const double hcs = hc1 / dlt;

    Vec dW(model.d, 0.0), sdW(model.d, 0.0), z(model.d, 0.0), g(model.d, 0.0);
    for (int k = 0; k < traj.n_steps; ++k) {
        std::fill(dW.begin(), dW.end(), 0.0);
        for (int j = 0; j < factor; ++j) {
            const double* r = bp.row(k * factor + j);
            for (int c = 0; c < model.d; ++c) dW[c] += r[c];
        }
        model.sigma.apply_inplace(dW.data(), sdW.data());

        const double* xk = traj.at(k);
        double* xn = traj.at(k + 1);
        if (!ham_kind) {
            evx.drift(pv, k, z);
            model.B.apply_inplace(xk, g.data());
            for (int c = 0; c < model.d; ++c) xn[c] = xk[c] + (g[c] + z[c]) * dlt + sdW[c];
            evx.push(k + 1, xn);
        } else {
            double zv = model.zc * (holder_scalar(evx.window_sup(k), model.k.alpha) +
                                    holder_scalar(evy.window_sup(k), model.k.alpha));
            const double* yk = traj.yat(k);
            double* yn = traj.yat(k + 1);
            for (int c = 0; c < model.d; ++c) {
                double gc = 0.0;
                for (int j = 0; j < model.d; ++j)
                    gc += model.Bx(c, j) * xk[j] + model.By(c, j) * yk[j];
                if (c == 0) gc += zv;
                yn[c] = yk[c] + gc * dlt + sdW[c];
                xn[c] = euler_x ? xk[c] + (xk[c] + yk[c]) * dlt
                                : ed * xk[c] + hc1 * yk[c] + hc2 * gc + hcs * sdW[c];
            }
            evx.push(k + 1, xn);
            evy.push(k + 1, yn);
        }
        (void)pvy;
    }
    return traj;
}

Trajectory reference_solution(const SdeModel& model, double T, const BrownianPath& bp,
                              int M_ref) {
    double dlt = model.tau / M_ref;
    double span = T + (model.memory == MemoryKind::Infinite ? model.t_hist : model.tau);
    if (span / dlt > 2e7)
        throw std::invalid_argument("reference_solution: grid exceeds the configured size cap");
    return simulate(model, default_scheme(model), M_ref, T, bp);
}

}  // namespace pdsde
