#pragma once

#include <cstdint>
#include <random>

namespace wifsmc {

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  // (0,1) open on both ends; F^{-1} lookups assume u > 0
  std::uniform_real_distribution<double> u(std::nextafter(0.0, 1.0), 1.0);
  return u(rng);
}

inline double normal01(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

// splitmix64 finaliser, used to mix task coordinates into per-task seeds
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0, std::uint64_t d = 0) {
  std::uint64_t s = mix64(base);
  s = mix64(s ^ a);
  s = mix64(s ^ b);
  s = mix64(s ^ c);
  s = mix64(s ^ d);
  return s;
}

}  // namespace wifsmc
