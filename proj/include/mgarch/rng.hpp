#pragma once

#include <cstdint>
#include <random>

namespace mgarch {

/// SplitMix64 mixing step; used to derive independent stream seeds from a
/// root seed so that parallel workers get reproducible, decorrelated engines.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for stream `index` of the generator tree rooted at `root`.
inline std::uint64_t stream_seed(std::uint64_t root, std::uint64_t index) {
    return splitmix64(splitmix64(root) ^ splitmix64(index * 0x9E3779B97F4A7C15ULL + 1));
}

inline std::mt19937_64 make_engine(std::uint64_t root, std::uint64_t index = 0) {
    return std::mt19937_64(stream_seed(root, index));
}

}  // namespace mgarch
