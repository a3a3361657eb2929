#pragma once

#include <cstdint>
#include <random>

namespace daadb {

using Rng = std::mt19937_64;

// Independent sub-stream seed for one pipeline stage (splitmix64 finaliser).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace streams {
inline constexpr std::uint64_t known_classes = 1;
inline constexpr std::uint64_t labeled_subsample = 2;
inline constexpr std::uint64_t encoder_init = 3;
inline constexpr std::uint64_t classifier_init = 4;
inline constexpr std::uint64_t batch_order = 5;
inline constexpr std::uint64_t boundary_init = 6;
inline constexpr std::uint64_t boundary_order = 7;
}  // namespace streams

}  // namespace daadb
