#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pdsde/rng.hpp"

namespace pdsde {

// Increment table of one d-dimensional Brownian path on the finest grid.
// Coarser dyadic levels are obtained by summing child increments
// left-to-right, so aggregation is bit-reproducible.
struct BrownianPath {
    int d = 1;
    int n_fine = 0;
    double dt_fine = 0.0;
    std::vector<double> incr;  // n_fine rows of d increments

    const double* row(int k) const { return incr.data() + static_cast<std::size_t>(k) * d; }
};

inline BrownianPath sample_brownian(std::uint64_t seed, std::uint64_t path_index, int d,
                                    int n_fine, double dt_fine) {
    if (n_fine < 0 || d < 1 || dt_fine <= 0.0)
        throw std::invalid_argument("sample_brownian: bad grid");
    BrownianPath bp;
    bp.d = d;
    bp.n_fine = n_fine;
    bp.dt_fine = dt_fine;
    bp.incr.resize(static_cast<std::size_t>(n_fine) * d);
    NormalStream rng(seed, path_index);
    double s = std::sqrt(dt_fine);
    for (double& v : bp.incr) v = s * rng.normal();
    return bp;
}

// Sums groups of `factor` consecutive fine increments (left-to-right).
inline std::vector<double> aggregate_increments(const BrownianPath& bp, int factor) {
    if (factor < 1 || bp.n_fine % factor != 0)
        throw std::invalid_argument("aggregate_increments: factor does not divide the fine grid");
    int n = bp.n_fine / factor;
    std::vector<double> out(static_cast<std::size_t>(n) * bp.d, 0.0);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < factor; ++j) {
            const double* src = bp.row(k * factor + j);
            double* dst = out.data() + static_cast<std::size_t>(k) * bp.d;
            for (int c = 0; c < bp.d; ++c) dst[c] += src[c];
        }
    return out;
}

}  // namespace pdsde
