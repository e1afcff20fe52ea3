#pragma once

#include <cstdint>
#include <random>

namespace agewire {

/// SplitMix64 finalizer; used as a stateless counter-based generator so a
/// draw depends only on its key, never on iteration order.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(mix64(seed) ^ a) ^ b);
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

/// Independent engine for stream `index` of `seed`.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(key(seed, index, 0x5eed));
}

}  // namespace agewire
