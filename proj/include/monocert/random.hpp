#pragma once

#include <cstdint>
#include <random>

namespace monocert {

/// One splitmix64 output for the given counter.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent stream for trial `index` of a run seeded with `master`, so
/// results do not depend on the order trials are evaluated in.
[[nodiscard]] inline std::mt19937_64 trial_rng(std::uint64_t master, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
}

inline constexpr std::uint64_t kDefaultSeed = 20240601;

}  // namespace monocert
