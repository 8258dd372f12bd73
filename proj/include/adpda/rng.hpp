#ifndef ADPDA_RNG_HPP
#define ADPDA_RNG_HPP

#include <cstdint>
#include <random>

namespace adpda {

using Rng = std::mt19937_64;

/// splitmix64 mixing step, used to derive independent seeds from a master
/// seed and a stream index.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for stream `stream` derived from a master seed. Distinct streams
/// are statistically independent; the derivation is deterministic.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = splitmix64(master ^ 0xD1B54A32D192ED03ULL);
    return splitmix64(s + stream * 0x9E3779B97F4A7C15ULL);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) {
    return Rng(derive_seed(master, stream));
}

}  // namespace adpda

#endif  // ADPDA_RNG_HPP
