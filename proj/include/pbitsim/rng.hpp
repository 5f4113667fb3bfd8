#pragma once

#include <cstdint>
#include <random>

namespace pbitsim {

/// Seeded pseudo-random stream used everywhere randomness is consumed.
using Rng = std::mt19937_64;

/// Stream seed for work item `index` of a run seeded with `seed`: the
/// splitmix64 finalizer applied to (seed XOR index). Items that own their
/// stream produce the same values no matter which thread runs them.
constexpr std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t z = (seed ^ index) + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(derive_stream_seed(seed, index));
}

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace pbitsim
