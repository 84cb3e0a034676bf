/*
 * Copyright 2026 The straq Authors
 * License: Apache License 2.0
 */
#ifndef STRAQ_RNG_HPP
#define STRAQ_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace straq {

using Rng = std::mt19937_64;

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Derives an independent stream seed from a master seed and a path of ids,
/// so that every (setting, repeat, method, ...) run owns its own stream
/// regardless of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = detail::mix64(master);
  for (std::uint64_t id : path) {
    s = detail::mix64(s ^ detail::mix64(id));
  }
  return s;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(detail::mix64(seed)); }

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace straq

#endif  // STRAQ_RNG_HPP
