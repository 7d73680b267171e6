#pragma once

#include <cstdint>
#include <random>

namespace adabag {

using Rng = std::mt19937_64;

// Pipeline stages that draw randomness. Each gets its own seed stream so a
// single replicate can be regenerated without replaying the others.
enum class SeedStage : std::uint64_t {
    split = 1,
    bootstrap = 2,
    bootstrap_retry = 3,
    simulate = 4,
    pca = 5,
};

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Counter-based derivation: (master, stage, index) -> independent seed.
inline std::uint64_t sub_seed(std::uint64_t master, SeedStage stage, std::uint64_t index = 0)
{
    return splitmix64(splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(stage))) + index);
}

inline Rng make_rng(std::uint64_t master, SeedStage stage, std::uint64_t index = 0)
{
    return Rng(sub_seed(master, stage, index));
}

} // namespace adabag
