#include "pdsde/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pdsde {

namespace {

double get(const std::map<std::string, double>& p, const std::string& key, double dflt) {
    auto it = p.find(key);
    return it == p.end() ? dflt : it->second;
}

void finish_sigma(SdeModel& m, double s) {
    m.sigma = Mat::scaled_identity(m.d, s);
    m.sigma_inv = m.sigma.inverse();
    m.sigma_hs = m.sigma.hs_norm();
    m.sigma_inv_hs = m.sigma_inv.hs_norm();
}

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("model: alpha must lie in (0, 1]");
}

// Largest eigenvalue of the symmetric 2x2 quadratic form behind the
// dissipativity condition for b(x,y) = -a1 x - a2 y.
double dissipativity_lambda(double a1, double a2, double al, double be, double ga) {
    double axx = al - ga * a1;
    double ayy = ga - be * a2;
    double s = 0.5 * (al + ga - be * a1 - ga * a2);
    double tr = axx + ayy;
    double disc = std::sqrt(0.25 * (axx - ayy) * (axx - ayy) + s * s);
    return -(0.5 * tr + disc);
}

}  // namespace

Vec SdeModel::drift_b2(const Vec& x, const Vec& y) const {
    Vec out = Bx.apply(x);
    Vec oy = By.apply(y);
    for (int i = 0; i < d; ++i) out[i] += oy[i];
    return out;
}

Vec SdeModel::z_point(const Vec& x) const {
    Vec out(d, 0.0);
    for (int i = 0; i < d; ++i) {
        double s = x[i] < 0.0 ? -1.0 : 1.0;
        out[i] = zc * s * holder_scalar(x[i], k.alpha);
    }
    return out;
}

double SdeModel::potential_V(const Vec& x) const {
    double s = 0.0;
    for (double v : x) s += v * v;
    return v_coeff * s;
}

SdeModel builtin_model(const std::string& name, const std::map<std::string, double>& params) {
    SdeModel m;
    m.name = name;
    m.d = static_cast<int>(get(params, "d", 1));
    if (m.d < 1) throw std::invalid_argument("model: d must be positive");
    m.tau = get(params, "tau", 1.0);
    if (m.tau <= 0.0) throw std::invalid_argument("model: tau must be positive");
    double s = get(params, "sigma", 1.0);
    if (s == 0.0) throw std::invalid_argument("model: sigma must be nonsingular");
    double x0 = get(params, "x0", 0.0);
    Vec x0v(m.d, x0);

    m.B = Mat::scaled_identity(m.d, 0.0);
    m.initial = [x0v](double) { return x0v; };

    if (name == "zero-drift") {
        m.memory = MemoryKind::Finite;
        m.zkind = FunctionalKind::None;
    } else if (name == "ou-linear") {
        double a = get(params, "a", -1.0);
        m.memory = MemoryKind::Finite;
        m.zkind = FunctionalKind::None;
        m.B = Mat::scaled_identity(m.d, a);
        m.k.L1 = std::fabs(a);
        m.k.beta = 2.0 * a;  // 2<x, a x> = 2a|x|^2 exactly
    } else if (name == "holder-point-delay" || name == "holder-supnorm") {
        double a = get(params, "a", 0.0);
        double c = get(params, "c", 0.5);
        double alpha = get(params, "alpha", 1.0);
        require_alpha(alpha);
        m.memory = MemoryKind::Finite;
        m.B = Mat::scaled_identity(m.d, a);
        m.k.L1 = std::fabs(a);
        m.k.beta = 2.0 * a;
        m.k.L2 = std::fabs(c);
        m.k.alpha = alpha;
        m.zc = c;
        if (name == "holder-point-delay") {
            m.zkind = FunctionalKind::PointDelay;
            m.zlag = get(params, "lag", m.tau);
            if (m.zlag < 0.0 || m.zlag > m.tau)
                throw std::invalid_argument("model: lag must lie in [0, tau]");
        } else {
            m.zkind = FunctionalKind::SupNorm;
        }
    } else if (name == "infinite-exp") {
        double a = get(params, "a", 0.0);
        double c = get(params, "c", 0.5);
        double alpha = get(params, "alpha", 1.0);
        double r = get(params, "r", 1.0);
        require_alpha(alpha);
        if (r <= 0.0) throw std::invalid_argument("model: r must be positive");
        m.memory = MemoryKind::Infinite;
        m.B = Mat::scaled_identity(m.d, a);
        m.k.L1 = std::fabs(a);
        m.k.beta = 2.0 * a;
        m.k.L4 = std::fabs(c);
        m.k.alpha = alpha;
        m.k.r = r;
        m.rate_r = r;
        m.zc = c;
        m.zkind = FunctionalKind::ExpWeighted;
        // Stored-history horizon: exp(-r T_hist) * bound < tol, rounded up to
        // a whole number of tau windows.
        double bound = get(params, "hist_bound", 1e3);
        double tol = get(params, "hist_tol", 1e-12);
        double t_hist = get(params, "t_hist", std::log(bound / tol) / r);
        m.t_hist = std::ceil(t_hist / m.tau) * m.tau;
    } else if (name == "hamiltonian-holder") {
        double a1 = get(params, "a1", 8.0);
        double a2 = get(params, "a2", 4.0);
        double c = get(params, "c", 0.5);
        double alpha = get(params, "alpha", 1.0);
        require_alpha(alpha);
        m.memory = MemoryKind::Hamiltonian;
        m.Bx = Mat::scaled_identity(m.d, -a1);
        m.By = Mat::scaled_identity(m.d, -a2);
        m.k.K1 = std::max(std::fabs(a1), std::fabs(a2));
        m.k.K2 = std::fabs(c);
        m.k.alpha = alpha;
        m.zc = c;
        m.zkind = FunctionalKind::SupNorm;  // pair of sup-norm functionals
        m.k.alpha_d3 = get(params, "alpha_d3", 4.0);
        m.k.beta_d3 = get(params, "beta_d3", 0.5);
        m.k.gamma_d3 = get(params, "gamma_d3", 0.75);
        double al = m.k.alpha_d3, be = m.k.beta_d3, ga = m.k.gamma_d3;
        if (!(ga > -al * be && ga < al * be))
            throw std::invalid_argument("model: gamma_d3 must lie in (-alpha_d3*beta_d3, alpha_d3*beta_d3)");
        m.k.lambda_d3 = dissipativity_lambda(a1, a2, al, be, ga);
        m.k.C = 0.0;
        double y0 = get(params, "y0", 0.0);
        Vec y0v(m.d, y0);
        m.initial2 = [y0v](double) { return y0v; };
    } else if (name == "gradient-gaussian") {
        double v = get(params, "v", 1.0);
        double c = get(params, "c", 0.25);
        double alpha = get(params, "alpha", 1.0);
        require_alpha(alpha);
        if (v <= 0.0) throw std::invalid_argument("model: v must be positive");
        m.memory = MemoryKind::Distributed;
        m.v_coeff = v;
        m.zc = c;
        m.k.alpha = alpha;
        m.k.m = 1.0;
        m.k.kappa = get(params, "kappa", 8.0);
        m.zkind = FunctionalKind::Distributed;
        // Z0(x) = -(sigma sigma^*) grad V = -2 v sigma sigma^* x
        finish_sigma(m, s);
        Mat ss = m.sigma.multiply(m.sigma.transpose());
        m.B = Mat::scaled_identity(m.d, 0.0);
        for (int i = 0; i < m.d; ++i)
            for (int j = 0; j < m.d; ++j) m.B(i, j) = -2.0 * v * ss(i, j);
        m.k.L0 = 2.0 * v * s * s;
        m.k.L1 = m.k.L0;
        m.k.beta = -4.0 * v * s * s;
        double rho_point = get(params, "rho_point", std::numeric_limits<double>::quiet_NaN());
        if (std::isnan(rho_point)) {
            m.rho.uniform = true;
        } else {
            if (rho_point < -m.tau || rho_point > 0.0)
                throw std::invalid_argument("model: rho_point must lie in [-tau, 0]");
            m.rho.uniform = false;
            m.rho.atoms = {{rho_point, 1.0}};
        }
        return m;
    } else {
        throw std::invalid_argument("unknown model name: " + name);
    }

    finish_sigma(m, s);
    return m;
}

Vec evaluate_functional_drift(const SdeModel& model, const SegmentPath& segment) {
    Vec out(model.d, 0.0);
    switch (model.zkind) {
        case FunctionalKind::None:
            break;
        case FunctionalKind::PointDelay: {
            Vec v = interpolate_segment(segment, -model.zlag);
            out[0] = model.zc * holder_scalar(norm2(v), model.k.alpha);
            break;
        }
        case FunctionalKind::SupNorm: {
            double n = segment_norm(segment, {HistoryNorm::Kind::Sup, 0.0});
            out[0] = model.zc * holder_scalar(n, model.k.alpha);
            break;
        }
        case FunctionalKind::ExpWeighted: {
            double n = segment_norm(segment, {HistoryNorm::Kind::ExpWeighted, model.rate_r});
            out[0] = model.zc * holder_scalar(n, model.k.alpha);
            break;
        }
        case FunctionalKind::Distributed: {
            if (model.rho.uniform) {
                // Trapezoid against the uniform density 1/tau on the segment grid.
                int len = segment.length();
                double w = segment.delta() / segment.tau;
                for (int j = 0; j < len; ++j) {
                    Vec x(segment.node(j), segment.node(j) + segment.d);
                    Vec z = model.z_point(x);
                    double wj = (j == 0 || j == len - 1) ? 0.5 * w : w;
                    for (int i = 0; i < model.d; ++i) out[i] += wj * z[i];
                }
            } else {
                for (const auto& [theta, weight] : model.rho.atoms) {
                    Vec x = interpolate_segment(segment, theta);
                    Vec z = model.z_point(x);
                    for (int i = 0; i < model.d; ++i) out[i] += weight * z[i];
                }
            }
            break;
        }
        case FunctionalKind::PairPointDelay:
            throw std::invalid_argument("evaluate_functional_drift: pair functional needs two segments");
    }
    return out;
}

Vec evaluate_functional_drift_pair(const SdeModel& model, const SegmentPath& pos,
                                   const SegmentPath& vel) {
    if (!model.is_hamiltonian())
        throw std::invalid_argument("evaluate_functional_drift_pair: model is not Hamiltonian");
    double np = segment_norm(pos, {HistoryNorm::Kind::Sup, 0.0});
    double nv = segment_norm(vel, {HistoryNorm::Kind::Sup, 0.0});
    Vec out(model.d, 0.0);
    out[0] = model.zc * (holder_scalar(np, model.k.alpha) + holder_scalar(nv, model.k.alpha));
    return out;
}

double printed_kappa2(double al, double be, double ga) {
    if (ga == 0.0) return 0.5 * std::min(al, be);  // limit convention
    double g = std::fabs(ga);
    double q = al / g + g / be;
    return 0.5 * std::min(al - 0.5 * q, be - 2.0 * g / q);
}

namespace {

// Strict smallness condition of the chosen theorem at horizon T.
bool condition_holds(const SdeModel& m, TheoremId th, double T) {
    const ModelConstants& k = m.k;
    double s2 = m.sigma_hs * m.sigma_hs;
    double si2 = m.sigma_inv_hs * m.sigma_inv_hs;
    switch (th) {
        case TheoremId::Th1:
        case TheoremId::Th2: {
            double bracket = (k.alpha == 1.0) ? 4.0 * k.L1 * k.L1 + k.L2 * k.L2 : k.L1 * k.L1;
            double lhs = 2.0 * s2 * si2 * bracket;
            return lhs < std::exp(-(1.0 + k.beta * T)) / (T * T);
        }
        case TheoremId::Th3: {
            double bracket = (k.alpha == 1.0) ? 4.0 * k.L1 * k.L1 + k.L4 * k.L4 : k.L1 * k.L1;
            double lhs = 2.0 * s2 * si2 * bracket;
            return lhs < std::exp(-(1.0 + k.beta * T)) / (T * T);
        }
        case TheoremId::Th4: {
            double k2 = printed_kappa2(k.alpha_d3, k.beta_d3, k.gamma_d3);
            double k3 = std::max(k.gamma_d3 * k.gamma_d3, k.beta_d3 * k.beta_d3);
            double bracket = (k.alpha == 1.0) ? 4.0 * k.K1 * k.K1 + k.K2 * k.K2 : 2.0 * k.K1 * k.K1;
            double lhs = 2.0 * k3 * s2 * si2 * bracket * T * T;
            // as-printed: lambda and T coupled through the right-hand side
            return lhs < k2 * std::exp(k.lambda_d3 * k2 * T - 1.0);
        }
        case TheoremId::Th5: {
            double dd = static_cast<double>(m.d);
            double c1 = k.kappa / (2.0 * std::max(2.0, dd) * si2 * T * T);
            double c2 = std::exp(-(1.0 + k.beta * T)) / (32.0 * s2 * si2 * T * T);
            double c3 = k.kappa / (std::max(1.0, dd / 2.0) * T);
            return 1.0 < std::min({c1, c2, c3});
        }
    }
    return false;
}

const char* formula_name(TheoremId th) {
    switch (th) {
        case TheoremId::Th1: return "th1";
        case TheoremId::Th2: return "th2";
        case TheoremId::Th3: return "th3";
        case TheoremId::Th4: return "th4-as-printed";
        case TheoremId::Th5: return "th5";
    }
    return "?";
}

}  // namespace

bool horizon_condition_holds(const SdeModel& model, TheoremId theorem, double T) {
    return condition_holds(model, theorem, T);
}

AdmissibleHorizon admissible_horizon(const SdeModel& model, TheoremId theorem) {
    AdmissibleHorizon out;
    out.formula_id = formula_name(theorem);

    const double t_lo = 1e-4, t_hi = 1e4;
    const int n_scan = 4000;
    double best = -1.0;
    int best_i = -1;
    for (int i = 0; i < n_scan; ++i) {
        double T = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (n_scan - 1));
        if (condition_holds(model, theorem, T)) {
            best = T;
            best_i = i;
        }
    }
    if (best < 0.0) {
        out.feasible = false;
        out.T_max = 0.0;
        return out;
    }
    if (best_i == n_scan - 1) {
        out.T_max = std::numeric_limits<double>::infinity();
        return out;
    }
    double lo = best;
    double hi = t_lo * std::pow(t_hi / t_lo, static_cast<double>(best_i + 1) / (n_scan - 1));
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (condition_holds(model, theorem, mid))
            lo = mid;
        else
            hi = mid;
    }
    out.T_max = lo;
    return out;
}

std::vector<std::string> catalog_names() {
    return {"zero-drift", "ou-linear",      "holder-point-delay", "holder-supnorm",
            "infinite-exp", "hamiltonian-holder", "gradient-gaussian"};
}

std::string catalog_manifest() {
    std::ostringstream os;
    os << R"json({
  "schema_version": 1,
  "models": [
    {
      "name": "zero-drift",
      "memory": "finite",
      "params": {
        "d": {"default": 1, "min": 1},
        "tau": {"default": 1.0, "min": 0.0, "exclusive_min": true},
        "sigma": {"default": 1.0, "nonzero": true},
        "x0": {"default": 0.0}
      }
    },
    {
      "name": "ou-linear",
      "memory": "finite",
      "params": {
        "d": {"default": 1, "min": 1},
        "tau": {"default": 1.0, "min": 0.0, "exclusive_min": true},
        "sigma": {"default": 1.0, "nonzero": true},
        "x0": {"default": 0.0},
        "a": {"default": -1.0}
      }
    },
    {
      "name": "holder-point-delay",
      "memory": "finite",
      "params": {
        "d": {"default": 1, "min": 1},
        "tau": {"default": 1.0, "min": 0.0, "exclusive_min": true},
        "sigma": {"default": 1.0, "nonzero": true},
        "x0": {"default": 0.0},
        "a": {"default": 0.0},
        "c": {"default": 0.5},
        "alpha": {"default": 1.0, "min": 0.0, "max": 1.0, "exclusive_min": true},
        "lag": {"default": "tau", "min": 0.0, "max": "tau"}
      }
    },
    {
      "name": "holder-supnorm",
      "memory": "finite",
      "params": {
        "d": {"default": 1, "min": 1},
        "tau": {"default": 1.0, "min": 0.0, "exclusive_min": true},
        "sigma": {"default": 1.0, "nonzero": true},
        "x0": {"default": 0.0},
        "a": {"default": 0.0},
        "c": {"default": 0.5},
        "alpha": {"default": 1.0, "min": 0.0, "max": 1.0, "exclusive_min": true}
      }
    },
    {
      "name": "infinite-exp",
      "memory": "infinite",
      "params": {
        "d": {"default": 1, "min": 1},
        "tau": {"default": 1.0, "min": 0.0, "exclusive_min": true},
        "sigma": {"default": 1.0, "nonzero": true},
        "x0": {"default": 0.0},
        "a": {"default": 0.0},
        "c": {"default": 0.5},
        "alpha": {"default": 1.0, "min": 0.0, "max": 1.0, "exclusive_min": true},
        "r": {"default": 1.0, "min": 0.0, "exclusive_min": true},
        "hist_bound": {"default": 1000.0},
        "hist_tol": {"default": 1e-12},
        "t_hist": {"default": "log(hist_bound/hist_tol)/r, rounded up to a multiple of tau"}
      }
    },
    {
      "name": "hamiltonian-holder",
      "memory": "hamiltonian",
      "params": {
        "d": {"default": 1, "min": 1},
        "tau": {"default": 1.0, "min": 0.0, "exclusive_min": true},
        "sigma": {"default": 1.0, "nonzero": true},
        "x0": {"default": 0.0},
        "y0": {"default": 0.0},
        "a1": {"default": 8.0},
        "a2": {"default": 4.0},
        "c": {"default": 0.5},
        "alpha": {"default": 1.0, "min": 0.0, "max": 1.0, "exclusive_min": true},
        "alpha_d3": {"default": 4.0},
        "beta_d3": {"default": 0.5},
        "gamma_d3": {"default": 0.75, "range": "(-alpha_d3*beta_d3, alpha_d3*beta_d3)"}
      }
    },
    {
      "name": "gradient-gaussian",
      "memory": "distributed",
      "params": {
        "d": {"default": 1, "min": 1},
        "tau": {"default": 1.0, "min": 0.0, "exclusive_min": true},
        "sigma": {"default": 1.0, "nonzero": true},
        "x0": {"default": 0.0},
        "v": {"default": 1.0, "min": 0.0, "exclusive_min": true},
        "c": {"default": 0.25},
        "alpha": {"default": 1.0, "min": 0.0, "max": 1.0, "exclusive_min": true},
        "kappa": {"default": 8.0, "min": 0.0, "exclusive_min": true},
        "rho_point": {"default": "absent (uniform density); atom location in [-tau, 0] when set"}
      }
    }
  ]
}
)json";
    return os.str();
}

}  // namespace pdsde
