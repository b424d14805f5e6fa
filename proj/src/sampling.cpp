#include "kpicomp/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace kpicomp {

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, std::uint64_t seed)
{
    if (k > n) throw std::invalid_argument("cannot sample more items than available");
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // partial Fisher-Yates
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(draw_below(rng, n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace kpicomp
