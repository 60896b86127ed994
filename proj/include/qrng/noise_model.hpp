#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "qrng/erf.hpp"
#include "qrng/errors.hpp"

namespace qrng {

// Homodyne measurement model q = g (X_a + N): a thermal input with mean photon
// number n seen through gain g, plus independent additive electronic noise.
class NoiseModel {
 public:
  NoiseModel(double gain, double mean_photon_number, double electronic_variance)
      : gain_(gain), mean_photon_number_(mean_photon_number), electronic_variance_(electronic_variance) {
    if (!(std::isfinite(gain) && gain > 0.0)) throw ConfigError("noise model: gain must be finite and > 0");
    if (!(std::isfinite(mean_photon_number) && mean_photon_number >= 0.0))
      throw ConfigError("noise model: mean_photon_number must be finite and >= 0");
    if (!(std::isfinite(electronic_variance) && electronic_variance >= 0.0))
      throw ConfigError("noise model: electronic_variance must be finite and >= 0");
  }

  double gain() const noexcept { return gain_; }
  double mean_photon_number() const noexcept { return mean_photon_number_; }
  double electronic_variance() const noexcept { return electronic_variance_; }

  // g^2 (1 + 2n): variance of the thermal quadrature after amplification.
  double shot_variance() const noexcept { return gain_ * gain_ * (1.0 + 2.0 * mean_photon_number_); }

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;

 private:
  double gain_;
  double mean_photon_number_;
  double electronic_variance_;
};

inline double output_variance(const NoiseModel& model) noexcept {
  return model.shot_variance() + model.electronic_variance();
}

// ADC with full-scale half-width R and 2^bits codes. Bins are left-closed,
// right-open and tile [-R, R): bin j covers [-R + j*dx, -R + (j+1)*dx).
class QuantizerSpec {
 public:
  static constexpr int min_bits = 2;
  static constexpr int max_bits = 16;

  QuantizerSpec(double range, int bits) : range_(range), bits_(bits) {
    if (!(std::isfinite(range) && range > 0.0)) throw ConfigError("quantizer: range must be finite and > 0");
    if (bits < min_bits || bits > max_bits)
      throw ConfigError("quantizer: bits must lie in [" + std::to_string(min_bits) + ", " +
                        std::to_string(max_bits) + "], got " + std::to_string(bits));
  }

  double range() const noexcept { return range_; }
  int bits() const noexcept { return bits_; }
  std::uint32_t cardinality() const noexcept { return std::uint32_t{1} << bits_; }
  // Division by a power of two is exact, so bin_width() * cardinality() == 2R.
  double bin_width() const noexcept { return 2.0 * range_ / static_cast<double>(cardinality()); }
  double edge(std::uint32_t j) const noexcept { return -range_ + static_cast<double>(j) * bin_width(); }
  double bin_center(std::uint32_t code) const noexcept { return edge(code) + 0.5 * bin_width(); }

  friend bool operator==(const QuantizerSpec&, const QuantizerSpec&) = default;

 private:
  double range_;
  int bits_;
};

class GaussianSpec {
 public:
  GaussianSpec(double mean, double variance) : mean_(mean), variance_(variance) {
    if (!std::isfinite(mean)) throw DomainError("gaussian: mean must be finite");
    if (!(std::isfinite(variance) && variance > 0.0)) throw DomainError("gaussian: variance must be finite and > 0");
  }

  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }
  double stddev() const noexcept { return std::sqrt(variance_); }

 private:
  double mean_;
  double variance_;
};

inline double gaussian_pdf(double x, const GaussianSpec& spec) {
  if (!std::isfinite(x)) throw DomainError("gaussian_pdf: x must be finite");
  const double d = x - spec.mean();
  return std::exp(-d * d / (2.0 * spec.variance())) / std::sqrt(2.0 * std::numbers::pi * spec.variance());
}

// Probability mass of each ADC bin under the Gaussian. Samples outside [-R, R)
// saturate, so bin 0 also holds the mass below -R and bin M-1 the mass above R.
inline std::vector<double> bin_probabilities(const GaussianSpec& spec, const QuantizerSpec& q) {
  const std::uint32_t m = q.cardinality();
  const double sigma = spec.stddev();

  // Per interior edge: standardized position and the smaller of its two tails,
  // so neighbouring bins in the far tails keep full relative precision.
  std::vector<double> z(m + 1);
  std::vector<double> tail(m + 1);
  z[0] = -std::numeric_limits<double>::infinity();
  z[m] = std::numeric_limits<double>::infinity();
  tail[0] = 0.0;
  tail[m] = 0.0;
  for (std::uint32_t j = 1; j < m; ++j) {
    z[j] = (q.edge(j) - spec.mean()) / sigma;
    tail[j] = z[j] >= 0.0 ? normal_upper_tail(z[j]) : normal_cdf(z[j]);
  }

  std::vector<double> p(m);
  for (std::uint32_t j = 0; j < m; ++j) {
    const double a = z[j];
    const double b = z[j + 1];
    double mass;
    if (a >= 0.0) {
      mass = tail[j] - tail[j + 1];
    } else if (b <= 0.0) {
      mass = tail[j + 1] - tail[j];
    } else {
      mass = 1.0 - tail[j] - tail[j + 1];
    }
    p[j] = mass > 0.0 ? mass : 0.0;
  }
  return p;
}

}  // namespace qrng
