#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hysterid {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed for a stage of a run: derive_seed(root, {stage, index, ...}).
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(root);
    for (std::uint64_t p : path) s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
    return s;
}

namespace stage {
inline constexpr std::uint64_t dataset = 1;
inline constexpr std::uint64_t parameters = 2;
inline constexpr std::uint64_t excitation = 3;
inline constexpr std::uint64_t noise = 4;
inline constexpr std::uint64_t init = 5;
inline constexpr std::uint64_t training = 6;
}  // namespace stage

}  // namespace hysterid
