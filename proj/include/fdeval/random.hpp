#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fdeval {

// Seeded randomness is derived per task from (seed, key) so results do not
// depend on iteration or scheduling order.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a; std::hash is not stable across standard libraries.
inline std::uint64_t stable_hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::mt19937_64 keyed_generator(std::uint64_t seed, std::string_view key) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ stable_hash(key)));
}

inline std::mt19937_64 keyed_generator(std::uint64_t seed, std::uint64_t key) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(key + 0x632be59bd9b4e019ULL)));
}

/// Uniform integer in [0, n). Rejection sampling, so the stream is identical
/// on every standard library (unlike std::uniform_int_distribution).
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

}  // namespace fdeval
