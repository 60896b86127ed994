#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace qrng {

namespace detail {

inline constexpr double erf_switch_point = 2.5;

// erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_n 2^n x^(2n+1) / (1*3*...*(2n+1)).
// All terms are positive, so there is no cancellation for |x| < erf_switch_point.
inline double erf_series(double x) {
  const double two_x2 = 2.0 * x * x;
  double term = x;
  double sum = x;
  for (int n = 1; n < 500; ++n) {
    term *= two_x2 / (2.0 * n + 1.0);
    sum += term;
    if (std::fabs(term) <= 1e-17 * std::fabs(sum)) break;
  }
  return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x) * sum;
}

// erfc(x) for x >= erf_switch_point through the Laplace continued fraction
//   erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
// evaluated with the modified Lentz method.
inline double erfc_continued_fraction(double x) {
  constexpr double tiny = 1e-300;
  double f = x;
  double c = f;
  double d = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double a = 0.5 * k;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    d = 1.0 / d;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x * x) / std::sqrt(std::numbers::pi) / f;
}

}  // namespace detail

// Error function, self-contained so certification results do not depend on
// the platform libm. Absolute error stays below 1e-12 on |x| <= 6.
inline double erf(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) return -erf(-x);
  if (x < detail::erf_switch_point) return detail::erf_series(x);
  if (x > 27.0) return 1.0;
  return 1.0 - detail::erfc_continued_fraction(x);
}

// Complementary error function; keeps relative precision in the upper tail.
inline double erfc(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) return 2.0 - erfc(-x);
  if (x < detail::erf_switch_point) return 1.0 - detail::erf_series(x);
  if (x > 27.0) return 0.0;
  return detail::erfc_continued_fraction(x);
}

// Standard normal upper tail Q(z) = P(Z >= z).
inline double normal_upper_tail(double z) { return 0.5 * erfc(z / std::numbers::sqrt2); }

// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * erfc(-z / std::numbers::sqrt2); }

}  // namespace qrng
