#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace kpicomp {

/// Unbiased draw in [0, bound) from a 64-bit engine (Lemire-style rejection).
/// Portable across standard libraries, unlike std::uniform_int_distribution.
inline std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound)
{
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

/// Uniform double in [0, 1) with 53 random bits.
inline double draw_unit(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// k distinct indices from [0, n), returned in ascending order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, std::uint64_t seed);

/// Mixes a base seed with a stream id into an independent seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace kpicomp
