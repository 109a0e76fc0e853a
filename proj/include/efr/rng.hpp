#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "efr/extremile.hpp"

namespace efr {

// splitmix64 finalizer; used to decorrelate (seed, rep) pairs into
// independent mt19937_64 streams so replications are reproducible
// regardless of execution order.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

inline std::mt19937_64 rep_engine(std::uint64_t seed, std::uint64_t rep) {
    const std::uint64_t mixed =
        splitmix64(splitmix64(seed + 0x9e3779b97f4a7c15ULL * (rep + 1)));
    return std::mt19937_64(mixed);
}

// Standard normal via inverse CDF; the uniform lands strictly inside (0,1).
inline double draw_normal(std::mt19937_64& eng) {
    const double u = (static_cast<double>(eng() >> 11) + 0.5) * 0x1p-53;
    return std_normal_quantile(u);
}

// In-place Fisher-Yates; spelled out (rather than std::shuffle) so the
// permutation stream is identical across standard libraries.
inline void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& eng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(eng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
}

} // namespace efr
