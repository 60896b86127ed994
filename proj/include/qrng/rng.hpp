#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace qrng {

// Simulation-grade randomness only. Nothing produced here is certified.

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 is counter-based: output k is mix(seed + (k + 1) * gamma), so any
// index can be evaluated directly. This is what lets simulate_session split
// work across threads and still match the sequential stream bit for bit.
inline constexpr std::uint64_t counter_u64(std::uint64_t seed, std::uint64_t counter) noexcept {
  return splitmix64_mix(seed + (counter + 1) * golden_gamma);
}

// Sub-seed for an independent stream, e.g. one per acquisition session.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64_mix(splitmix64_mix(master ^ 0xA0761D6478BD642FULL) + stream * golden_gamma);
}

// Uniform in (0, 1], never zero so log() is safe.
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) noexcept {
  return (static_cast<double>(counter_u64(seed, counter) >> 11) + 1.0) * 0x1.0p-53;
}

// Box-Muller pair number `pair`, consuming uniforms 2*pair and 2*pair+1.
inline std::pair<double, double> counter_normal_pair(std::uint64_t seed, std::uint64_t pair) noexcept {
  const double u1 = counter_uniform(seed, 2 * pair);
  const double u2 = counter_uniform(seed, 2 * pair + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

// Standard normal variate number `index` of the stream.
inline double counter_normal(std::uint64_t seed, std::uint64_t index) noexcept {
  const auto [z0, z1] = counter_normal_pair(seed, index / 2);
  return (index % 2 == 0) ? z0 : z1;
}

// Sequential SplitMix64, for expanding short seeds into longer bit strings.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += golden_gamma;
    return splitmix64_mix(state_);
  }

 private:
  std::uint64_t state_;
};

}  // namespace qrng
