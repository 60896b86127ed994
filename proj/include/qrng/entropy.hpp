#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrng/acquisition.hpp"
#include "qrng/erf.hpp"
#include "qrng/errors.hpp"

namespace qrng {

namespace detail {

inline void require_distribution(std::span<const double> p, const char* op) {
  if (p.empty()) throw DomainError(std::string(op) + ": empty distribution");
  double sum = 0.0;
  for (double v : p) {
    if (!(std::isfinite(v) && v >= 0.0)) throw DomainError(std::string(op) + ": entries must be finite and >= 0");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw DomainError(std::string(op) + ": distribution sums to " + std::to_string(sum) + ", not 1");
}

}  // namespace detail

// -sum p log2 p with 0 log 0 = 0.
inline double shannon_entropy(std::span<const double> p) {
  detail::require_distribution(p, "shannon_entropy");
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return std::clamp(h, 0.0, std::log2(static_cast<double>(p.size())));
}

// -log2 max_j p_j: the best single guess of an adversary without side information.
inline double min_entropy(std::span<const double> p) {
  detail::require_distribution(p, "min_entropy");
  const double pmax = *std::max_element(p.begin(), p.end());
  return -std::log2(pmax);
}

// Renyi-1/2 entropy 2 log2 sum sqrt(p_k), used as the max-entropy of the
// conjugate quadrature in the entropic uncertainty relation.
inline double max_entropy_conjugate(std::span<const double> p) {
  detail::require_distribution(p, "max_entropy_conjugate");
  double s = 0.0;
  for (double v : p) s += std::sqrt(v);
  return std::max(0.0, 2.0 * std::log2(s));
}

struct QuantumShannon {
  double value;
  bool clamped;  // the classical components exceeded the total
};

// Shannon entropy of the quantum part, H_total - sum of classical components.
inline QuantumShannon quantum_shannon(double total, std::span<const double> classical) {
  if (!(std::isfinite(total) && total >= 0.0)) throw DomainError("quantum_shannon: total must be finite and >= 0");
  double rest = total;
  for (double c : classical) {
    if (!(std::isfinite(c) && c >= 0.0)) throw DomainError("quantum_shannon: classical components must be >= 0");
    rest -= c;
  }
  if (rest < 0.0) return {0.0, true};
  return {rest, false};
}

// Lower bound on H_min(X|E) for a thermal input of mean photon number n read
// out with bin width dx and effective width g':
//   -log2 (sqrt(n) + sqrt(n+1))^2 - log2 erf(dx / (2 g')).
// Negative for large n; usability is the caller's decision.
inline double conditional_min_entropy(double mean_photon_number, double bin_width, double effective_width) {
  if (!(std::isfinite(mean_photon_number) && mean_photon_number >= 0.0))
    throw DomainError("conditional_min_entropy: n must be >= 0");
  if (!(std::isfinite(bin_width) && bin_width > 0.0)) throw DomainError("conditional_min_entropy: bin width must be > 0");
  if (!(std::isfinite(effective_width) && effective_width > 0.0))
    throw DomainError("conditional_min_entropy: effective width must be > 0");
  const double amp = std::sqrt(mean_photon_number) + std::sqrt(mean_photon_number + 1.0);
  const double h = -2.0 * std::log2(amp) - std::log2(erf(bin_width / (2.0 * effective_width)));
  return h + 0.0;  // no -0 at the saturated limit
}

// log2 sup|J_f|: bits lost when up to sup|J_f| true codes collapse onto one output code.
inline double adc_penalty(std::uint64_t max_preimage) {
  if (max_preimage < 1) throw DomainError("adc_penalty: sup|J_f| must be >= 1");
  return std::log2(static_cast<double>(max_preimage));
}

// Largest preimage of a code-collapse map, where output_of[j] is the output
// code reported for true code j.
inline std::uint64_t collapse_bound(std::span<const std::uint32_t> output_of) {
  if (output_of.empty()) throw DomainError("collapse_bound: empty map");
  std::map<std::uint32_t, std::uint64_t> preimage;
  std::uint64_t worst = 0;
  for (auto f : output_of) worst = std::max(worst, ++preimage[f]);
  return worst;
}

// Code-collapse map inferred from data: inside the observed span every code
// that never occurs is attributed to the nearest observed code below it.
inline std::vector<std::uint32_t> measured_collapse_map(const SampleHistogram& h) {
  const auto counts = h.counts();
  std::size_t first = 0;
  while (counts[first] == 0) ++first;
  std::size_t last = counts.size() - 1;
  while (counts[last] == 0) --last;
  std::vector<std::uint32_t> map;
  map.reserve(last - first + 1);
  auto current = static_cast<std::uint32_t>(first);
  for (std::size_t j = first; j <= last; ++j) {
    if (counts[j] != 0) current = static_cast<std::uint32_t>(j);
    map.push_back(current);
  }
  return map;
}

// Single-shot secure rate H_min(Q|E) - 2 log2(1/eps). May be negative.
inline double secure_rate_single_shot(double h_min_cond, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("secure_rate_single_shot: epsilon must lie in (0, 1]");
  if (!std::isfinite(h_min_cond)) throw DomainError("secure_rate_single_shot: entropy must be finite");
  return h_min_cond + 2.0 * std::log2(epsilon);
}

// log2(1 / (2 eps_hash^2)), computed in the log domain.
inline double hash_penalty_bits(double epsilon_hash) {
  if (!(epsilon_hash > 0.0 && epsilon_hash < 1.0)) throw DomainError("hash penalty: epsilon_hash must lie in (0, 1)");
  return -1.0 - 2.0 * std::log2(epsilon_hash);
}

// Leftover-hash budget k = floor(l * h - log2(1 / (2 eps_hash^2))), at least 0.
inline std::uint64_t extractable_length(std::uint64_t samples, double h_min_cond, double epsilon_hash) {
  if (samples == 0) throw DomainError("extractable_length: sample count must be > 0");
  if (!(std::isfinite(h_min_cond) && h_min_cond >= 0.0))
    throw DomainError("extractable_length: entropy per sample must be finite and >= 0");
  const double k = static_cast<double>(samples) * h_min_cond - hash_penalty_bits(epsilon_hash);
  if (k <= 0.0) return 0;
  return static_cast<std::uint64_t>(std::floor(k));
}

struct CertifyParams {
  double epsilon = 1e-10;
  double epsilon_hash = 1e-20;
  double mean_photon_number = 0.0;
  double gain = 1.0;
  // Defaults to gain * sqrt(1 + 2n), the shot-noise standard deviation.
  std::optional<double> effective_width;
  // sup|J_f|; ignored when measured_collapse is set.
  std::uint64_t max_preimage = 1;
  bool measured_collapse = false;
  // Classical Shannon components held constant between runs, e.g. {"c1": 0.0}.
  std::map<std::string, double> classical_constants;

  double resolved_effective_width() const {
    return effective_width.value_or(gain * std::sqrt(1.0 + 2.0 * mean_photon_number));
  }
};

struct EntropyReport {
  double shannon_total = 0.0;
  std::map<std::string, double> shannon_classical;  // "c2" is the measured electronic noise
  double shannon_quantum = 0.0;
  bool shannon_quantum_clamped = false;

  double min_entropy_unconditional = 0.0;
  double min_entropy_classical = 0.0;
  double max_entropy_total = 0.0;

  double conditional_min_entropy_ideal = 0.0;
  std::uint64_t max_preimage = 1;
  double adc_penalty = 0.0;
  double conditional_min_entropy_final = 0.0;

  double secure_rate_single_shot = 0.0;
  double secure_rate_usable = 0.0;
  double hash_penalty = 0.0;
  std::uint64_t extractable_length = 0;

  // Parameter echo.
  double epsilon = 0.0;
  double epsilon_hash = 0.0;
  std::uint64_t sample_count = 0;
  double mean_photon_number = 0.0;
  double gain = 0.0;
  double bin_width = 0.0;
  double effective_width = 0.0;
  std::uint32_t cardinality = 0;
  std::size_t distinct_codes = 0;

  std::vector<std::string> warnings;

  // No quantum surplus over the classical noise.
  bool certification_failed() const noexcept { return shannon_quantum <= 0.0; }

  friend bool operator==(const EntropyReport&, const EntropyReport&) = default;
};

// Entropy accounting for one LO_ON / LO_OFF pair of histograms.
inline EntropyReport certify(const SampleHistogram& lo_on, const SampleHistogram& lo_off, const CertifyParams& params) {
  if (!(lo_on.quantizer() == lo_off.quantizer()))
    throw DomainError("certify: LO_ON and LO_OFF histograms use different quantizers");
  const QuantizerSpec& q = lo_on.quantizer();
  const auto p_on = lo_on.probabilities();
  const auto p_off = lo_off.probabilities();

  EntropyReport r;
  r.epsilon = params.epsilon;
  r.epsilon_hash = params.epsilon_hash;
  r.sample_count = lo_on.total();
  r.mean_photon_number = params.mean_photon_number;
  r.gain = params.gain;
  r.bin_width = q.bin_width();
  r.effective_width = params.resolved_effective_width();
  r.cardinality = q.cardinality();
  r.distinct_codes = lo_on.distinct_codes();

  r.shannon_total = shannon_entropy(p_on);
  r.shannon_classical = params.classical_constants;
  r.shannon_classical["c2"] = shannon_entropy(p_off);
  std::vector<double> classical;
  for (const auto& [label, bits] : r.shannon_classical) classical.push_back(bits);
  const auto hq = quantum_shannon(r.shannon_total, classical);
  r.shannon_quantum = hq.value;
  r.shannon_quantum_clamped = hq.clamped;
  if (hq.clamped) r.warnings.push_back("classical entropy exceeds total; quantum Shannon entropy clamped to 0");
  if (r.shannon_quantum <= 0.0) r.warnings.push_back("no quantum entropy surplus over classical noise");

  r.min_entropy_unconditional = min_entropy(p_on);
  r.min_entropy_classical = min_entropy(p_off);
  r.max_entropy_total = max_entropy_conjugate(p_on);

  r.conditional_min_entropy_ideal =
      conditional_min_entropy(params.mean_photon_number, r.bin_width, r.effective_width);
  r.max_preimage = params.measured_collapse ? collapse_bound(measured_collapse_map(lo_on)) : params.max_preimage;
  r.adc_penalty = adc_penalty(r.max_preimage);
  r.conditional_min_entropy_final = r.conditional_min_entropy_ideal - r.adc_penalty;

  r.secure_rate_single_shot = secure_rate_single_shot(r.conditional_min_entropy_final, params.epsilon);
  r.secure_rate_usable = std::max(0.0, r.secure_rate_single_shot);
  if (r.secure_rate_single_shot < 0.0) r.warnings.push_back("single-shot secure rate is negative; reported as 0");

  r.hash_penalty = hash_penalty_bits(params.epsilon_hash);
  if (r.conditional_min_entropy_final <= 0.0) {
    r.warnings.push_back("conditional min-entropy is not positive; nothing can be extracted");
    r.extractable_length = 0;
  } else if (r.shannon_quantum <= 0.0) {
    r.extractable_length = 0;
  } else {
    r.extractable_length = extractable_length(r.sample_count, r.conditional_min_entropy_final, params.epsilon_hash);
  }
  if (r.extractable_length == 0 && r.conditional_min_entropy_final > 0.0 && r.shannon_quantum > 0.0)
    r.warnings.push_back("extraction budget is zero after the hash penalty");
  return r;
}

}  // namespace qrng
