#pragma once

#include <cstdint>
#include <cmath>
#include <limits>
#include <random>

namespace superinfect {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of task `index` in stream `stream` under `master`:
///   splitmix64(splitmix64(master ^ splitmix64(stream)) + index)
/// Streams separate independent uses of one master seed (network runs,
/// branching runs, graph sampling, ...).
constexpr std::uint64_t task_seed(std::uint64_t master, std::uint64_t stream,
                                  std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

inline constexpr const char* kSeedRule =
    "splitmix64(splitmix64(master ^ splitmix64(stream)) + index); engine mt19937_64";

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Exp(rate) draw; +inf when rate == 0.
inline double exponential(Rng& rng, double rate) {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log1p(-uniform01(rng)) / rate;
}

/// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(rng);
}

}  // namespace superinfect
