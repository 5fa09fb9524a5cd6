#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qkrylov {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for an independent stream identified by (base seed, ids...).
/// Each id is folded through SplitMix64, so streams do not depend on the order
/// in which they are requested.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = splitmix64(base);
  for (auto id : ids) h = splitmix64(h ^ splitmix64(id + 0x2545F4914F6CDD1DULL));
  return h;
}

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t base, std::initializer_list<std::uint64_t> ids) {
  return Rng(derive_seed(base, ids));
}

}  // namespace qkrylov
