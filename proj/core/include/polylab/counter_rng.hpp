#pragma once

// Stateless counter-based normals. Every draw is a pure function of its key,
// so any number of threads (or paths) can query the same lattice without
// coordination and always see the same values.

#include <cstdint>
#include <utility>

namespace polylab::rng {

// SplitMix64 finalizer; full avalanche on 64-bit input.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Folds one more key word into a running hash.
constexpr std::uint64_t absorb(std::uint64_t state, std::uint64_t word) noexcept {
  return mix64(state ^ mix64(word + 0x9e3779b97f4a7c15ULL));
}

inline constexpr std::uint64_t kNoiseDomain = 0x6e6f6973652d6669ULL;
inline constexpr std::uint64_t kPathDomain = 0x706174682d696e63ULL;
inline constexpr std::uint64_t kOracleDomain = 0x6f7261636c652d6dULL;

constexpr std::uint64_t domain_seed(std::uint64_t domain, std::uint64_t seed) noexcept {
  return absorb(mix64(domain), seed);
}

// Uniform in the open interval (0, 1) from the top 52 bits; both
// endpoints stay representable after the half-step shift.
constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Two independent standard normals that depend only on the key hash. The
// hash seeds a counter stream that feeds a ziggurat sampler.
std::pair<double, double> normal_pair(std::uint64_t key_hash) noexcept;

// The last key coordinate selects one half of a normal pair:
// coordinates 2m and 2m+1 share the pair keyed by m.
inline double normal_from_prefix(std::uint64_t prefix, std::int64_t last) noexcept {
  const std::uint64_t pair_key = absorb(prefix, static_cast<std::uint64_t>(last >> 1));
  const auto [c, s] = normal_pair(pair_key);
  return (last & 1) ? s : c;
}

}  // namespace polylab::rng
