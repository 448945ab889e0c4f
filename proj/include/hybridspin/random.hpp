#pragma once

#include <cstdint>
#include <random>

namespace hybridspin::rng {

/// Seeding scheme identifier, recorded in run manifests. Seeds are split with
/// the SplitMix64 finalizer; geometry draws use std::mt19937_64 with
/// Boost.Random 1.74 distributions; per-sample spin states use the SplitMix64
/// finalizer as a keyed counter hash.
inline constexpr const char* kAlgorithm = "splitmix64-split/mt19937_64/boost-random-1.74 v1";

/// SplitMix64 output function (Steele, Lea and Flood, 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `tag` at position `index` of a parent seed.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag, std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(parent) ^ tag) + index);
}

/// Top 53 bits mapped to [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Stateless uniform draw for (key, counter).
constexpr double counter_uniform(std::uint64_t key, std::uint64_t counter) noexcept {
  return to_unit(splitmix64(key ^ splitmix64(counter)));
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

}  // namespace hybridspin::rng
