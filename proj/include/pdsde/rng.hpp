#pragma once

#include <cmath>
#include <cstdint>

namespace pdsde {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based normal stream keyed by (seed, path index). Output depends only
// on the key and the draw counter, so per-path results are independent of
// thread scheduling.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t path_index)
        : key_(mix64(mix64(seed) ^ (0x632be59bd9b4e019ULL + mix64(path_index)))) {}

    double uniform() {
        std::uint64_t r = mix64(key_ + (++ctr_) * 0x9e3779b97f4a7c15ULL);
        // in (0, 1]
        return static_cast<double>((r >> 11) + 1) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double rad = std::sqrt(-2.0 * std::log(u1));
        double ang = 6.283185307179586476925286766559 * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace pdsde
