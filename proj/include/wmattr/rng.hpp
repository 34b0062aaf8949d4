#pragma once

#include <cstdint>
#include <random>

namespace wmattr {

using Rng = std::mt19937_64;

/// Substream families. Every stochastic draw in an experiment is keyed by
/// (master seed, stream, index) so runs are reproducible regardless of the
/// order in which users are processed.
enum class Stream : std::uint64_t {
    Selection = 1,
    BetaDraw = 2,
    Watermarked = 3,
    Unwatermarked = 4,
    BitProbabilities = 5,
    Verify = 6,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

inline Rng make_rng(std::uint64_t master, Stream stream, std::uint64_t index) {
    return Rng(derive_seed(master, static_cast<std::uint64_t>(stream), index));
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Uniform integer in [0, bound), unbiased (Lemire). bound must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    unsigned __int128 product = static_cast<unsigned __int128>(rng()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
        const std::uint64_t threshold = -bound % bound;
        while (low < threshold) {
            product = static_cast<unsigned __int128>(rng()) * bound;
            low = static_cast<std::uint64_t>(product);
        }
    }
    return static_cast<std::uint64_t>(product >> 64);
}

} // namespace wmattr
