#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "qrng/errors.hpp"
#include "qrng/noise_model.hpp"
#include "qrng/rng.hpp"

namespace qrng {

// Acquisition configurations: LO swept (homodyne imbalance characterization),
// LO off (electronic noise only), LO on (shot noise plus electronic noise).
enum class Configuration : std::uint8_t { lo_sweep = 0, lo_off = 1, lo_on = 2 };

inline std::string_view to_string(Configuration tag) {
  switch (tag) {
    case Configuration::lo_sweep: return "LO_SWEEP";
    case Configuration::lo_off: return "LO_OFF";
    case Configuration::lo_on: return "LO_ON";
  }
  return "UNKNOWN";
}

inline std::optional<Configuration> configuration_from_string(std::string_view s) {
  if (s == "LO_SWEEP") return Configuration::lo_sweep;
  if (s == "LO_OFF") return Configuration::lo_off;
  if (s == "LO_ON") return Configuration::lo_on;
  return std::nullopt;
}

inline std::optional<Configuration> configuration_from_byte(std::uint8_t b) {
  if (b > static_cast<std::uint8_t>(Configuration::lo_on)) return std::nullopt;
  return static_cast<Configuration>(b);
}

struct SessionConfig {
  Configuration tag;
  NoiseModel model;
  QuantizerSpec quantizer;
  std::uint64_t sample_count;
  std::uint64_t rng_seed;
  double sample_rate = 500'000.0;  // Hz, informational
  std::vector<double> sweep_gains;  // LO_SWEEP only

  void validate() const {
    if (sample_count == 0) throw ConfigError("session: sample_count must be > 0");
    if (!(std::isfinite(sample_rate) && sample_rate > 0.0)) throw ConfigError("session: sample_rate must be > 0");
    if (tag == Configuration::lo_sweep) {
      if (sweep_gains.size() < 2) throw ConfigError("session: LO_SWEEP needs at least 2 gain values");
      for (double g : sweep_gains)
        if (!(std::isfinite(g) && g > 0.0)) throw ConfigError("session: sweep gains must be finite and > 0");
    } else if (!sweep_gains.empty()) {
      throw ConfigError("session: sweep_gains given for a non-sweep configuration");
    }
  }
};

// Variance of the analog signal seen by the ADC. With the LO off only the
// electronic noise remains.
inline double session_variance(const SessionConfig& cfg) {
  switch (cfg.tag) {
    case Configuration::lo_off: return cfg.model.electronic_variance();
    case Configuration::lo_on: return output_variance(cfg.model);
    case Configuration::lo_sweep: break;
  }
  throw ConfigError("session: LO_SWEEP has one variance per gain; use simulate_sweep");
}

class SampleBlock {
 public:
  SampleBlock(std::vector<std::uint16_t> codes, QuantizerSpec quantizer, Configuration tag)
      : codes_(std::move(codes)), quantizer_(quantizer), tag_(tag) {
    const auto m = quantizer_.cardinality();
    for (std::size_t i = 0; i < codes_.size(); ++i)
      if (codes_[i] >= m)
        throw DomainError("sample block: code " + std::to_string(codes_[i]) + " at index " + std::to_string(i) +
                          " exceeds " + std::to_string(m - 1));
  }

  std::span<const std::uint16_t> codes() const noexcept { return codes_; }
  const QuantizerSpec& quantizer() const noexcept { return quantizer_; }
  Configuration tag() const noexcept { return tag_; }
  std::size_t size() const noexcept { return codes_.size(); }
  bool empty() const noexcept { return codes_.empty(); }

  friend bool operator==(const SampleBlock&, const SampleBlock&) = default;

 private:
  std::vector<std::uint16_t> codes_;
  QuantizerSpec quantizer_;
  Configuration tag_;
};

// code = clamp(floor((x + R) / dx), 0, M - 1); out-of-range inputs saturate.
inline std::uint16_t quantize(double x, const QuantizerSpec& q) {
  if (!std::isfinite(x)) throw DomainError("quantize: x must be finite");
  const double t = std::floor((x + q.range()) / q.bin_width());
  if (t <= 0.0) return 0;
  const double top = static_cast<double>(q.cardinality() - 1);
  if (t >= top) return static_cast<std::uint16_t>(q.cardinality() - 1);
  return static_cast<std::uint16_t>(t);
}

// Bin center of a code.
inline double dequantize(std::uint16_t code, const QuantizerSpec& q) { return q.bin_center(code); }

namespace detail {

inline void fill_gaussian_codes(std::span<std::uint16_t> out, std::uint64_t first_index, double stddev,
                                std::uint64_t seed, const QuantizerSpec& q) {
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double x = stddev > 0.0 ? stddev * counter_normal(seed, first_index + k) : 0.0;
    out[k] = quantize(x, q);
  }
}

inline SampleBlock simulate_gaussian(double variance, std::uint64_t count, std::uint64_t seed,
                                     const QuantizerSpec& q, Configuration tag, unsigned threads) {
  std::vector<std::uint16_t> codes(count);
  const double stddev = std::sqrt(variance);
  threads = std::max(1u, threads);
  if (threads == 1 || count < 2 * threads) {
    fill_gaussian_codes(codes, 0, stddev, seed, q);
  } else {
    // Each worker evaluates its own index range of the counter-based stream.
    std::vector<std::thread> workers;
    const std::uint64_t chunk = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::uint64_t begin = t * chunk;
      if (begin >= count) break;
      const std::uint64_t end = std::min(count, begin + chunk);
      workers.emplace_back([&, begin, end] {
        fill_gaussian_codes(std::span(codes).subspan(begin, end - begin), begin, stddev, seed, q);
      });
    }
    for (auto& w : workers) w.join();
  }
  return SampleBlock(std::move(codes), q, tag);
}

}  // namespace detail

// Draws sample_count values from N(0, session_variance(cfg)) and quantizes them.
// The output depends only on cfg (the thread count does not change it).
inline SampleBlock simulate_session(const SessionConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  if (cfg.tag == Configuration::lo_sweep) throw ConfigError("session: LO_SWEEP yields several blocks; use simulate_sweep");
  return detail::simulate_gaussian(session_variance(cfg), cfg.sample_count, cfg.rng_seed, cfg.quantizer, cfg.tag,
                                   threads);
}

// One block per sweep gain; block i uses derive_seed(rng_seed, i).
inline std::vector<SampleBlock> simulate_sweep(const SessionConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  if (cfg.tag != Configuration::lo_sweep) throw ConfigError("session: simulate_sweep needs an LO_SWEEP configuration");
  std::vector<SampleBlock> blocks;
  blocks.reserve(cfg.sweep_gains.size());
  for (std::size_t i = 0; i < cfg.sweep_gains.size(); ++i) {
    const NoiseModel m(cfg.sweep_gains[i], cfg.model.mean_photon_number(), cfg.model.electronic_variance());
    blocks.push_back(detail::simulate_gaussian(output_variance(m), cfg.sample_count, derive_seed(cfg.rng_seed, i),
                                               cfg.quantizer, Configuration::lo_sweep, threads));
  }
  return blocks;
}

class SampleHistogram {
 public:
  SampleHistogram(std::vector<std::uint64_t> counts, QuantizerSpec quantizer)
      : counts_(std::move(counts)), quantizer_(quantizer) {
    if (counts_.size() != quantizer_.cardinality()) throw DomainError("histogram: counts length must equal cardinality");
    for (auto c : counts_) total_ += c;
    if (total_ == 0) throw DomainError("histogram: empty");
  }

  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }
  const QuantizerSpec& quantizer() const noexcept { return quantizer_; }

  std::vector<double> probabilities() const {
    std::vector<double> p(counts_.size());
    const double inv = 1.0 / static_cast<double>(total_);
    for (std::size_t i = 0; i < counts_.size(); ++i) p[i] = static_cast<double>(counts_[i]) * inv;
    return p;
  }

  std::size_t distinct_codes() const noexcept {
    return static_cast<std::size_t>(std::count_if(counts_.begin(), counts_.end(), [](auto c) { return c != 0; }));
  }

  friend bool operator==(const SampleHistogram&, const SampleHistogram&) = default;

 private:
  std::vector<std::uint64_t> counts_;
  QuantizerSpec quantizer_;
  std::uint64_t total_ = 0;
};

inline SampleHistogram histogram(const SampleBlock& block) {
  if (block.empty()) throw DomainError("histogram: empty sample block");
  std::vector<std::uint64_t> counts(block.quantizer().cardinality(), 0);
  for (auto c : block.codes()) ++counts[c];
  return SampleHistogram(std::move(counts), block.quantizer());
}

// Sum of |p - q| / 2.
inline double total_variation_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DomainError("total_variation_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
  return 0.5 * s;
}

}  // namespace qrng
