#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cogwifi::rng {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

/// Seed of the named substream `stream` (with optional indices) of a run seed.
/// Substreams never share state, so consumers of one stream cannot perturb
/// another stream's draws.
constexpr std::uint64_t derive(std::uint64_t seed, std::string_view stream,
                               std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = splitmix64(seed ^ fnv1a(stream));
    h = splitmix64(h ^ splitmix64(a + 0x632BE59BD9B4E019ULL));
    h = splitmix64(h ^ splitmix64(b + 0x85157AF5ULL));
    return h;
}

inline Engine make_engine(std::uint64_t seed, std::string_view stream,
                          std::uint64_t a = 0, std::uint64_t b = 0) {
    return Engine(derive(seed, stream, a, b));
}

} // namespace cogwifi::rng
