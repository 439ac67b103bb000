#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace shapemap {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to combine seed material deterministically.
inline std::uint64_t mix_bits(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return mix_bits(a ^ mix_bits(b));
}

// Fold a string tag into seed material (FNV-1a), so derived streams are
// independent per (seed, tag, index) and order-insensitive across workers.
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return mix_seed(mix_seed(seed, h), index);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline Rng make_rng(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
    return Rng(mix_seed(seed, tag, index));
}

}  // namespace shapemap
