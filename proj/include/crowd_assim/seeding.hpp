#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace crowd_assim {

using Rng = std::mt19937_64;

/// Tags that keep each derived stream disjoint from the others.
enum class Stream : std::uint64_t {
  kAgentParams = 1,
  kBehaviour = 2,
  kObservation = 3,
  kParticle = 4,
  kResample = 5,
  kCell = 6,
  kRepetition = 7,
  kTruth = 8,
  kFilter = 9,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stable child seed: folds each key into the running hash with mix64.
/// The result depends only on the base seed and the ordered keys, never on
/// execution order, so jobs can be scheduled freely.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix64(base);
  for (std::uint64_t k : keys) {
    h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  }
  return h;
}

constexpr std::uint64_t key(Stream s) noexcept { return static_cast<std::uint64_t>(s); }

inline std::uint64_t key(double v) noexcept { return std::bit_cast<std::uint64_t>(v); }

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace crowd_assim
