#pragma once

// Counter-based random streams. Every deviate is a pure function of
// (seed, stream ids, index), so results never depend on thread scheduling or
// on the order in which replicates, repetitions or rows are processed.

#include <cstdint>

namespace trialmed::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Child key for stream `id` under `key`.
constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t id) noexcept {
  return mix64(key + kGolden * (id + 1) + 0x632BE59BD9B4E019ULL);
}

/// Raw 64-bit draw number `index` of the stream keyed by `key`.
constexpr std::uint64_t bits(std::uint64_t key, std::uint64_t index) noexcept {
  return mix64(key + kGolden * (index + 1));
}

/// Uniform on [0, 1) with 53 random bits.
constexpr double uniform(std::uint64_t key, std::uint64_t index) noexcept {
  return static_cast<double>(bits(key, index) >> 11) * 0x1.0p-53;
}

/// Uniform integer on [0, n) by multiply-shift (n >= 1).
inline std::uint64_t below(std::uint64_t key, std::uint64_t index, std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits(key, index)) * n) >> 64);
}

// Stream tags, so that unrelated consumers of one seed never share draws.
enum Stream : std::uint64_t {
  kSimulation = 1,
  kBootstrapResample = 2,
  kBootstrapSimulation = 3,
  kSynthesis = 4,
};

}  // namespace trialmed::rng
