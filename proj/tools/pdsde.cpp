#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pdsde/diagnostics.hpp"
#include "pdsde/girsanov.hpp"
#include "pdsde/montecarlo.hpp"
#include "pdsde/scheme.hpp"

using namespace pdsde;
using nlohmann::json;

namespace {

std::map<std::string, double> parse_kv(const std::vector<std::string>& kvs) {
    std::map<std::string, double> out;
    for (const auto& kv : kvs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--param", "expected key=value, got '" + kv + "'");
        out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    return out;
}

std::vector<int> parse_levels(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

SchemeKind parse_scheme(const std::string& s) {
    if (s == "interp") return SchemeKind::EmInterpolated;
    if (s == "trunc") return SchemeKind::TruncatedEm;
    if (s == "hamiltonian") return SchemeKind::Hamiltonian;
    if (s == "hamiltonian-eulerx") return SchemeKind::HamiltonianEulerX;
    throw CLI::ValidationError("--scheme", "unknown scheme '" + s + "'");
}

json config_json(const std::string& model, const std::map<std::string, double>& params,
                 const std::string& scheme, double T, long paths, std::uint64_t seed) {
    json c;
    c["model"] = model;
    c["params"] = params;
    if (!scheme.empty()) c["scheme"] = scheme;
    c["T"] = T;
    c["paths"] = paths;
    c["seed"] = seed;
    c["library_version"] = library_version();
    return c;
}

void write_file(const std::string& path, const std::string& content) {
    if (path.empty()) return;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << content;
}

int verdict_exit(const std::string& v) {
    if (v == "pass") return 0;
    if (v == "inconclusive") return 3;
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"path-dependent SDE simulation and weak-convergence harness"};
    app.set_config("--config", "", "flat key=value config file; flags override file values");
    app.require_subcommand(1);

    std::string model_name = "zero-drift", scheme_s = "trunc", payoff_s = "sin";
    std::vector<std::string> params_kv, payoff_kv;
    std::string levels_s = "8,16,32,64,128";
    std::string out_path, csv_path;
    double T = 1.0, alpha = -1.0;
    long paths = 10000;
    std::uint64_t seed = 1;
    int M = 64, M_ref = 0;

    auto add_model_flags = [&](CLI::App* cmd) {
        cmd->add_option("--model", model_name, "catalog model name");
        cmd->add_option("--param", params_kv, "model parameter override key=value (repeatable)");
        cmd->add_option("--alpha", alpha, "shortcut for --param alpha=<v>");
        cmd->add_option("--T", T, "time horizon");
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--paths", paths, "Monte Carlo path count");
        cmd->add_option("--out", out_path, "JSON report output path");
    };

    auto* cat = app.add_subcommand("catalog", "print the machine-readable model manifest");

    auto* sim = app.add_subcommand("simulate", "run one trajectory and dump it as CSV");
    add_model_flags(sim);
    sim->add_option("--scheme", scheme_s, "interp | trunc | hamiltonian | hamiltonian-eulerx");
    sim->add_option("--M", M, "steps per memory window");
    std::uint64_t path_index = 0;
    sim->add_option("--path-index", path_index, "Brownian substream index");
    sim->add_option("--csv", csv_path, "trajectory CSV output path");

    auto* conv = app.add_subcommand("converge", "weak-error table across stepsize levels");
    add_model_flags(conv);
    conv->add_option("--scheme", scheme_s, "interp | trunc | hamiltonian | hamiltonian-eulerx");
    conv->add_option("--levels", levels_s, "comma-separated M levels, dyadic");
    conv->add_option("--Mref", M_ref, "reference level (default 16 * max level)");
    conv->add_option("--payoff", payoff_s, "sin | indicator | clamp");
    conv->add_option("--payoff-param", payoff_kv, "payoff parameter key=value (repeatable)");
    conv->add_option("--csv", csv_path, "per-level error CSV output path");

    auto* gir = app.add_subcommand("girsanov-check",
                                   "cross-validate the importance-sampled estimator");
    add_model_flags(gir);
    gir->add_option("--M", M, "steps per memory window");
    gir->add_option("--payoff", payoff_s, "sin | indicator | clamp");
    gir->add_option("--payoff-param", payoff_kv, "payoff parameter key=value (repeatable)");

    auto* diag = app.add_subcommand("diagnose", "auxiliary-bound diagnostics");
    add_model_flags(diag);
    std::string check = "displacement", op_s = "trunc", lambdas_s = "";
    int p_moment = 4;
    long n_samples = 10000;
    double kappa = 0.5, la = 2.0, lb = 2.0, lg = 1.0;
    diag->add_option("--check", check, "displacement | lyapunov | mu0 | expmoment");
    diag->add_option("--op", op_s, "displacement operator: interp | trunc");
    diag->add_option("--p", p_moment, "moment order");
    diag->add_option("--levels", levels_s, "comma-separated M levels");
    diag->add_option("--M", M, "grid for expmoment paths");
    diag->add_option("--samples", n_samples, "sample count (lyapunov)");
    diag->add_option("--kappa", kappa, "exponent for mu0");
    diag->add_option("--lyap-alpha", la, "Lyapunov alpha");
    diag->add_option("--lyap-beta", lb, "Lyapunov beta");
    diag->add_option("--lyap-gamma", lg, "Lyapunov gamma");
    diag->add_option("--lambdas", lambdas_s, "comma-separated lambda grid (expmoment)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        auto params = parse_kv(params_kv);
        if (alpha >= 0.0) params["alpha"] = alpha;

        if (cat->parsed()) {
            std::cout << catalog_manifest();
            return 0;
        }

        if (sim->parsed()) {
            SdeModel model = builtin_model(model_name, params);
            SchemeKind kind = parse_scheme(scheme_s);
            double dlt = model.tau / M;
            long n_steps = std::llround(T / dlt);
            BrownianPath bp = sample_brownian(seed, path_index, model.d,
                                              static_cast<int>(n_steps), dlt);
            Trajectory traj = simulate(model, kind, M, T, bp);
            std::ostringstream os;
            os << "t";
            for (int c = 0; c < model.d; ++c) os << ",x" << c;
            if (model.is_hamiltonian())
                for (int c = 0; c < model.d; ++c) os << ",y" << c;
            os << "\n";
            for (int k = -traj.n_hist; k <= traj.n_steps; ++k) {
                os << k * dlt;
                for (int c = 0; c < model.d; ++c) os << "," << traj.at(k)[c];
                if (model.is_hamiltonian())
                    for (int c = 0; c < model.d; ++c) os << "," << traj.yat(k)[c];
                os << "\n";
            }
            if (csv_path.empty())
                std::cout << os.str();
            else
                write_file(csv_path, os.str());
            json j;
            j["config"] = config_json(model_name, params, scheme_s, T, 1, seed);
            j["config"]["M"] = M;
            j["n_steps"] = traj.n_steps;
            write_file(out_path, j.dump(2));
            return 0;
        }

        if (conv->parsed()) {
            SdeModel model = builtin_model(model_name, params);
            SchemeKind kind = parse_scheme(scheme_s);
            Payoff payoff = Payoff::parse(payoff_s, parse_kv(payoff_kv));
            std::vector<int> levels = parse_levels(levels_s);
            int mref = M_ref > 0 ? M_ref : 16 * levels.back();
            WeakErrorReport rep =
                weak_error_table(model, kind, levels, T, payoff, paths, seed, mref);
            json j;
            j["config"] = config_json(model_name, params, scheme_s, T, paths, seed);
            j["config"]["levels"] = levels;
            j["config"]["M_ref"] = mref;
            j["config"]["payoff"] = payoff.id();
            j["report"] = json::parse(rep.to_json());
            std::cout << j.dump(2) << "\n";
            write_file(out_path, j.dump(2));
            write_file(csv_path, rep.to_csv());
            return rep.fitted_order || rep.note == "scheme exact" ? 0 : 3;
        }

        if (gir->parsed()) {
            SdeModel model = builtin_model(model_name, params);
            Payoff payoff = Payoff::parse(payoff_s, parse_kv(payoff_kv));
            ImportanceEstimate is =
                importance_sampled_expectation(model, payoff, T, M, paths, seed, WeightVariant::R1);
            MonteCarloEstimate direct =
                estimate_expectation(model, default_scheme(model), M, T, payoff, paths, seed + 1);
            double diff = std::fabs(is.estimate.mean - direct.mean);
            double comb = 3.0 * std::sqrt(is.estimate.se * is.estimate.se + direct.se * direct.se);
            bool agree = diff <= comb;
            bool unit_mean = std::fabs(is.weight_mean - 1.0) <= 3.0 * is.weight_se;
            bool cap_ok = is.cap_rate < 1e-3;
            json j;
            j["config"] = config_json(model_name, params, "", T, paths, seed);
            j["config"]["M"] = M;
            j["config"]["payoff"] = payoff.id();
            j["is_estimate"] = {{"mean", is.estimate.mean}, {"stderr", is.estimate.se}};
            j["direct_estimate"] = {{"mean", direct.mean}, {"stderr", direct.se}};
            j["weight_mean"] = is.weight_mean;
            j["weight_stderr"] = is.weight_se;
            j["cap_rate"] = is.cap_rate;
            j["cap_count"] = is.cap_count;
            j["agree_within_3se"] = agree;
            j["unit_mean_within_3se"] = unit_mean;
            j["cap_rate_ok"] = cap_ok;
            j["lambda_thresholds"] = {
                {"eq11", novikov_threshold(model, QKind::SegmentNormSq, T).lambda_max},
                {"eq12", novikov_threshold(model, QKind::SigmaInvZSq, T).lambda_max}};
            bool pass = agree && unit_mean && cap_ok;
            j["verdict"] = pass ? "pass" : "fail";
            std::cout << j.dump(2) << "\n";
            write_file(out_path, j.dump(2));
            return pass ? 0 : 2;
        }

        if (diag->parsed()) {
            DiagnosticReport rep;
            if (check == "lyapunov") {
                rep = lyapunov_bounds_check(la, lb, lg, n_samples, seed);
            } else if (check == "mu0") {
                SdeModel model = builtin_model(model_name, params);
                Mu0Result r = mu0_integrability(model, kappa);
                rep.check_id = "mu0-integrability";
                rep.verdict = r.diverged ? "fail" : "pass";
                rep.stats["kappa"] = kappa;
                rep.stats["value"] = r.value;
                rep.stats["domain_R"] = r.domain_R;
                rep.stats["diverged"] = r.diverged ? 1.0 : 0.0;
                rep.notes = r.notes;
            } else if (check == "displacement") {
                SdeModel model = builtin_model(model_name, params);
                DisplacementOp op =
                    op_s == "interp" ? DisplacementOp::Interpolated : DisplacementOp::Truncated;
                rep = displacement_scaling(model, p_moment, parse_levels(levels_s), T, paths, seed,
                                           op);
            } else if (check == "expmoment") {
                SdeModel model = builtin_model(model_name, params);
                std::vector<double> lambdas;
                std::stringstream ss(lambdas_s);
                std::string item;
                while (std::getline(ss, item, ',')) lambdas.push_back(std::stod(item));
                if (lambdas.empty()) {
                    double thr = novikov_threshold(model, QKind::SegmentNormSq, T).lambda_max;
                    if (std::isfinite(thr))
                        lambdas = {0.0, thr / 2.0, 0.9 * thr};
                    else
                        lambdas = {0.0, 0.1, 0.5};
                }
                rep = exponential_moment_sweep(model, QKind::SegmentNormSq, T, M, lambdas, paths,
                                               seed);
            } else {
                throw CLI::ValidationError("--check", "unknown check '" + check + "'");
            }
            json j = json::parse(rep.to_json());
            j["config"] = config_json(model_name, params, "", T, paths, seed);
            std::cout << j.dump(2) << "\n";
            write_file(out_path, j.dump(2));
            return verdict_exit(rep.verdict);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
