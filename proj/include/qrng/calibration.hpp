#pragma once

#include <cmath>
#include <string>

#include "qrng/entropy.hpp"
#include "qrng/noise_model.hpp"

namespace qrng {

// Shannon entropy (bits) of N(mean, variance) after quantization by q.
inline double discretized_shannon(double variance, const QuantizerSpec& q, double mean = 0.0) {
  return shannon_entropy(bin_probabilities(GaussianSpec(mean, variance), q));
}

// Variance whose quantized Gaussian has the requested Shannon entropy. Entropy
// grows with the width until the distribution starts to saturate the ADC, so
// the search is a bisection on log(sigma) over [dx/1000, R/2].
inline double variance_for_shannon(double target_bits, const QuantizerSpec& q, double mean = 0.0) {
  double lo = std::log(q.bin_width() * 1e-3);
  double hi = std::log(q.range() * 0.5);
  const auto h = [&](double log_sigma) { return discretized_shannon(std::exp(2.0 * log_sigma), q, mean); };
  const double h_lo = h(lo);
  const double h_hi = h(hi);
  if (!(target_bits > h_lo && target_bits < h_hi))
    throw ConfigError("calibration: Shannon target " + std::to_string(target_bits) + " bits is outside the reachable (" +
                      std::to_string(h_lo) + ", " + std::to_string(h_hi) + ") for this quantizer");
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) < target_bits) lo = mid;
    else hi = mid;
  }
  return std::exp(lo + hi);  // sigma^2 at the midpoint
}

}  // namespace qrng
