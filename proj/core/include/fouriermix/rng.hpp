#pragma once

#include <cstdint>
#include <random>

namespace fouriermix {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent, reproducible per-item
// streams (per image, per epoch) from one user seed.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ index);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t index) {
  return Rng(derive_seed(seed, index));
}

// Uniform real in [lo, hi]; returns lo exactly for a degenerate interval.
inline double uniform_real(Rng& rng, double lo, double hi) {
  if (!(hi > lo))
    return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline bool coin_flip(Rng& rng) { return std::bernoulli_distribution(0.5)(rng); }

} // namespace fouriermix
