#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pdsde/model.hpp"
#include "pdsde/scheme.hpp"

namespace pdsde {

// Worker count from PDSDE_WORKERS (default 1). Per-path work is stored into
// preallocated slots and reduced sequentially by path index, so results are
// identical for any worker count.
int worker_count();
void parallel_paths(long n, const std::function<void(long)>& body);

struct Payoff {
    enum class Kind { Sin, Indicator, Clamp };
    Kind kind = Kind::Sin;
    double scale = 1.0;      // sin(scale * x_1)
    double threshold = 0.0;  // 1{x_1 > threshold}
    double lo = -1.0, hi = 1.0;

    double operator()(const double* x) const;
    double sup_bound() const;
    std::string id() const;
    static Payoff parse(const std::string& name, const std::map<std::string, double>& params = {});
};

struct MonteCarloEstimate {
    double mean = 0.0;
    double se = 0.0;
    long n_paths = 0;
    long n_flagged = 0;
    bool unreliable = false;  // flagged-path rate > 1%
    std::string payoff_id, model_id, scheme_id;
    double T = 0.0;
    int M = 0;
};

MonteCarloEstimate estimate_expectation(const SdeModel& model, SchemeKind scheme, int M, double T,
                                        const Payoff& payoff, long n_paths, std::uint64_t seed);

struct WeakErrorRow {
    int M = 0;
    double delta = 0.0;
    double error = 0.0;   // |mean difference to the reference|
    double se = 0.0;      // stderr of the difference
    bool resolved = false;
};

struct WeakErrorReport {
    std::vector<WeakErrorRow> rows;
    std::optional<double> fitted_order;
    double order_stderr = 0.0;
    std::string regime_tag;  // inside-theorem / outside-theorem
    int reference_M = 0;
    double ref_bias = 0.0;       // payoff shift when refining M_ref to 2*M_ref
    double ref_bias_se = 0.0;
    long ref_bias_paths = 0;
    long n_paths = 0;
    std::uint64_t seed = 0;
    std::string model_id, scheme_id, payoff_id, note;
    double T = 0.0;

    std::string to_json() const;
    std::string to_csv() const;
};

WeakErrorReport weak_error_table(const SdeModel& model, SchemeKind scheme,
                                 const std::vector<int>& levels, double T, const Payoff& payoff,
                                 long n_paths, std::uint64_t seed, int M_ref);

// Weighted least squares of log error on log delta; weights (error/se)^2.
// Returns (order, order_stderr). Requires >= 3 rows and distinct deltas.
std::pair<double, double> fit_order(const std::vector<WeakErrorRow>& resolved_rows);

inline const char* library_version() { return "0.1.0"; }

}  // namespace pdsde
