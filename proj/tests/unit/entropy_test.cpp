#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qrng/calibration.hpp"
#include "qrng/entropy.hpp"

using qrng::Configuration;
using qrng::QuantizerSpec;
using qrng::SampleBlock;
using qrng::SampleHistogram;

namespace {

std::vector<double> uniform(std::size_t m) { return std::vector<double>(m, 1.0 / static_cast<double>(m)); }

std::vector<double> delta(std::size_t m) {
  std::vector<double> p(m, 0.0);
  p[0] = 1.0;
  return p;
}

TEST(ShannonEntropy, Examples) {
  EXPECT_DOUBLE_EQ(qrng::shannon_entropy(uniform(4)), 2.0);
  EXPECT_EQ(qrng::shannon_entropy(delta(4)), 0.0);
  EXPECT_NEAR(qrng::shannon_entropy(std::vector<double>{0.5, 0.25, 0.25}), 1.5, 1e-15);
}

TEST(ShannonEntropy, RejectsNonNormalizedInput) {
  EXPECT_THROW(qrng::shannon_entropy(std::vector<double>{0.5, 0.4}), qrng::DomainError);
  EXPECT_THROW(qrng::shannon_entropy(std::vector<double>{1.5, -0.5}), qrng::DomainError);
  EXPECT_THROW(qrng::shannon_entropy(std::vector<double>{}), qrng::DomainError);
  EXPECT_THROW(qrng::min_entropy(std::vector<double>{0.3}), qrng::DomainError);
  EXPECT_THROW(qrng::max_entropy_conjugate(std::vector<double>{0.3}), qrng::DomainError);
}

TEST(QuantumShannon, Examples) {
  const double c2[] = {2.520};
  auto r = qrng::quantum_shannon(4.518, c2);
  EXPECT_NEAR(r.value, 1.998, 1e-12);
  EXPECT_FALSE(r.clamped);

  r = qrng::quantum_shannon(3.25, {});
  EXPECT_EQ(r.value, 3.25);

  const double c16[] = {5.122};
  EXPECT_NEAR(qrng::quantum_shannon(8.021, c16).value, 2.899, 1e-12);
}

TEST(QuantumShannon, ClampsWithFlagAndRejectsNegatives) {
  const double big[] = {3.0, 2.0};
  const auto r = qrng::quantum_shannon(4.0, big);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.clamped);
  const double neg[] = {-0.1};
  EXPECT_THROW(qrng::quantum_shannon(4.0, neg), qrng::DomainError);
  EXPECT_THROW(qrng::quantum_shannon(-1.0, {}), qrng::DomainError);
}

TEST(MinEntropy, Examples) {
  EXPECT_DOUBLE_EQ(qrng::min_entropy(uniform(4096)), 12.0);
  EXPECT_EQ(qrng::min_entropy(delta(16)), 0.0);
  // Standard normal centred in a dx = 0.1 bin; the peak bin integral is
  // 0.0398776116767449 (Simpson oracle in noise_model_test).
  const auto p = qrng::bin_probabilities(qrng::GaussianSpec(0.05, 1.0), QuantizerSpec(204.8, 12));
  EXPECT_NEAR(qrng::min_entropy(p), 4.648277182378022, 1e-9);
}

TEST(MaxEntropyConjugate, Examples) {
  EXPECT_NEAR(qrng::max_entropy_conjugate(uniform(16)), 4.0, 1e-12);
  EXPECT_EQ(qrng::max_entropy_conjugate(delta(8)), 0.0);
  EXPECT_NEAR(qrng::max_entropy_conjugate(std::vector<double>{0.5, 0.5}), 1.0, 1e-15);
}

TEST(ConditionalMinEntropy, Examples) {
  EXPECT_NEAR(qrng::conditional_min_entropy(0.0, 12.0, 1.0), 0.0, 1e-9);
  // -log2 erf(0.5) = 0.942030270034202
  EXPECT_NEAR(qrng::conditional_min_entropy(0.0, 1.0, 1.0), 0.942030270034202, 1e-12);
  // -log2 (1 + sqrt 2)^2 = -2.543106606327224
  EXPECT_NEAR(qrng::conditional_min_entropy(1.0, 12.0, 1.0), -2.543106606327224, 1e-9);
}

TEST(ConditionalMinEntropy, RejectsBadParameters) {
  EXPECT_THROW(qrng::conditional_min_entropy(-1.0, 1.0, 1.0), qrng::DomainError);
  EXPECT_THROW(qrng::conditional_min_entropy(0.0, 0.0, 1.0), qrng::DomainError);
  EXPECT_THROW(qrng::conditional_min_entropy(0.0, 1.0, 0.0), qrng::DomainError);
}

// Coarser bins lump more outcomes together, so the bound falls as dx grows.
TEST(ConditionalMinEntropyProperty, MonotoneInPhotonNumberAndBinWidth) {
  for (double w : {0.1, 1.0, 7.5}) {
    double prev = INFINITY;
    for (double n = 0.0; n <= 10.0; n += 0.05) {
      const double h = qrng::conditional_min_entropy(n, 1.0, w);
      ASSERT_LE(h, prev + 1e-12);
      prev = h;
    }
    prev = INFINITY;
    for (double dx = 0.001; dx <= 30.0; dx *= 1.1) {
      const double h = qrng::conditional_min_entropy(0.5, dx, w);
      ASSERT_LE(h, prev + 1e-12);
      prev = h;
    }
  }
}

TEST(AdcPenalty, Examples) {
  EXPECT_EQ(qrng::adc_penalty(1), 0.0);
  EXPECT_EQ(qrng::adc_penalty(2), 1.0);
  EXPECT_THROW(qrng::adc_penalty(0), qrng::DomainError);
}

TEST(AdcPenalty, CollapseMapFromMeasuredCodes) {
  // 4096 codes of which only every third is ever produced, fewer than 2000
  // distinct values: each observed code stands for itself and two missing neighbours.
  const QuantizerSpec q(4.0, 12);
  std::vector<std::uint64_t> counts(4096, 0);
  for (std::size_t j = 100; j < 4000; j += 3) counts[j] = 5;
  const SampleHistogram h(counts, q);
  EXPECT_LT(h.distinct_codes(), 2000u);
  const auto map = qrng::measured_collapse_map(h);
  EXPECT_EQ(qrng::collapse_bound(map), 3u);
  EXPECT_NEAR(qrng::adc_penalty(qrng::collapse_bound(map)), std::log2(3.0), 1e-15);

  const std::uint32_t explicit_map[] = {0, 0, 1, 2, 2, 2, 3};
  EXPECT_EQ(qrng::collapse_bound(explicit_map), 3u);
}

TEST(SecureRate, Examples) {
  EXPECT_EQ(qrng::secure_rate_single_shot(10.0, 1.0), 10.0);
  // 70 - 20 log2(10) = 3.561438102252753
  EXPECT_NEAR(qrng::secure_rate_single_shot(70.0, 1e-10), 3.561438102252753, 1e-9);
  EXPECT_LT(qrng::secure_rate_single_shot(5.0, 1e-10), 0.0);
  EXPECT_THROW(qrng::secure_rate_single_shot(5.0, 0.0), qrng::DomainError);
  EXPECT_THROW(qrng::secure_rate_single_shot(5.0, 1.5), qrng::DomainError);
}

TEST(ExtractableLength, HashPenalty) {
  // log2(1 / (2 * 1e-40)) = 131.877123795494494
  EXPECT_NEAR(qrng::hash_penalty_bits(1e-20), 131.8771237954945, 1e-9);
}

TEST(ExtractableLength, Examples) {
  EXPECT_EQ(qrng::extractable_length(1'000'000, 0.294, 1e-20), 293868u);
  EXPECT_EQ(qrng::extractable_length(100, 1.0, 1e-20), 0u);
  EXPECT_THROW(qrng::extractable_length(0, 1.0, 1e-20), qrng::DomainError);
  EXPECT_THROW(qrng::extractable_length(10, -1.0, 1e-20), qrng::DomainError);
  EXPECT_THROW(qrng::extractable_length(10, 1.0, 1.0), qrng::DomainError);
}

TEST(ExtractableLengthProperty, Monotone) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::uint64_t> l_d(1, 10'000'000);
  std::uniform_real_distribution<double> h_d(0.0, 16.0);
  std::uniform_real_distribution<double> e_d(-40.0, -1.0);
  for (int i = 0; i < 2000; ++i) {
    const auto l = l_d(rng);
    const double h = h_d(rng);
    const double e = std::pow(10.0, e_d(rng));
    const auto k = qrng::extractable_length(l, h, e);
    ASSERT_LE(k, qrng::extractable_length(l + 1000, h, e));
    ASSERT_LE(k, qrng::extractable_length(l, h + 0.01, e));
    ASSERT_GE(k, qrng::extractable_length(l, h, e / 10.0));
    ASSERT_LE(static_cast<double>(k), static_cast<double>(l) * h);
  }
}

// Property: Renyi ordering H_inf <= H_1 <= H_1/2.
TEST(RenyiOrderingProperty, HoldsOnRandomDistributions) {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<std::size_t> m_d(1, 4096);
  for (int i = 0; i < 500; ++i) {
    const auto p = qrng::oracle::random_distribution(rng, m_d(rng));
    const double hmin = qrng::min_entropy(p), h = qrng::shannon_entropy(p), hmax = qrng::max_entropy_conjugate(p);
    ASSERT_LE(hmin, h + 1e-12);
    ASSERT_LE(h, hmax + 1e-12);
    ASSERT_LE(h, std::log2(static_cast<double>(p.size())) + 1e-12);
  }
}

// Fine quantization links the discrete min-entropy to the continuous
// 1/2 log2(2 pi nu^2) - log2(dx).
TEST(MinEntropyProperty, MatchesContinuousLimitForFineBins) {
  for (double sigma : {0.5, 1.0, 3.0}) {
    for (int ratio : {10, 20, 50}) {
      const double dx = sigma / ratio;
      const QuantizerSpec q(dx * 2048.0, 12);
      const auto p = qrng::bin_probabilities(qrng::GaussianSpec(0.0, sigma * sigma), q);
      const double continuous = 0.5 * std::log2(2.0 * std::numbers::pi * sigma * sigma) - std::log2(dx);
      EXPECT_NEAR(qrng::min_entropy(p), continuous, 0.01) << sigma << " " << ratio;
    }
  }
}

SampleHistogram hist_from(const std::vector<std::uint64_t>& counts, const QuantizerSpec& q) {
  return SampleHistogram(counts, q);
}

TEST(Certify, DeltaOffUniformOnGivesFullQuantumShannon) {
  const QuantizerSpec q(4.0, 4);
  std::vector<std::uint64_t> on(16, 10), off(16, 0);
  off[8] = 160;
  const auto r = qrng::certify(hist_from(on, q), hist_from(off, q), {});
  EXPECT_DOUBLE_EQ(r.shannon_quantum, 4.0);
  EXPECT_DOUBLE_EQ(r.shannon_total, 4.0);
  EXPECT_EQ(r.shannon_classical.at("c2"), 0.0);
}

TEST(Certify, IdenticalHistogramsGiveNoSurplus) {
  const QuantizerSpec q(4.0, 8);
  std::mt19937_64 rng(2);
  std::vector<std::uint64_t> counts(256);
  for (auto& c : counts) c = rng() % 50;
  const auto h = hist_from(counts, q);
  const auto r = qrng::certify(h, h, {});
  EXPECT_EQ(r.shannon_quantum, 0.0);
  EXPECT_EQ(r.extractable_length, 0u);
  EXPECT_TRUE(r.certification_failed());
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Certify, QuantizerMismatchIsDomainError) {
  std::vector<std::uint64_t> a(16, 1), b(32, 1);
  EXPECT_THROW(qrng::certify(hist_from(a, QuantizerSpec(4.0, 4)), hist_from(b, QuantizerSpec(4.0, 5)), {}),
               qrng::DomainError);
  EXPECT_THROW(qrng::certify(hist_from(a, QuantizerSpec(4.0, 4)), hist_from(a, QuantizerSpec(2.0, 4)), {}),
               qrng::DomainError);
}

TEST(Certify, ComposesTheIndividualOperations) {
  const QuantizerSpec q(64.0, 8);
  const auto on = qrng::histogram(qrng::simulate_session(
      {Configuration::lo_on, qrng::NoiseModel(2.0, 0.0, 0.5), q, 200'000, 1, 500'000.0, {}}));
  const auto off = qrng::histogram(qrng::simulate_session(
      {Configuration::lo_off, qrng::NoiseModel(2.0, 0.0, 0.5), q, 200'000, 2, 500'000.0, {}}));
  qrng::CertifyParams params;
  params.gain = 2.0;
  params.classical_constants["c1"] = 0.1;
  params.max_preimage = 2;
  const auto r = qrng::certify(on, off, params);

  const double total = qrng::shannon_entropy(on.probabilities());
  const double c2 = qrng::shannon_entropy(off.probabilities());
  EXPECT_EQ(r.shannon_total, total);
  EXPECT_EQ(r.shannon_classical.at("c2"), c2);
  EXPECT_EQ(r.shannon_classical.at("c1"), 0.1);
  EXPECT_NEAR(r.shannon_quantum, total - c2 - 0.1, 1e-12);
  EXPECT_EQ(r.effective_width, 2.0);
  EXPECT_EQ(r.conditional_min_entropy_ideal, qrng::conditional_min_entropy(0.0, q.bin_width(), 2.0));
  EXPECT_EQ(r.adc_penalty, 1.0);
  EXPECT_EQ(r.conditional_min_entropy_final, r.conditional_min_entropy_ideal - 1.0);
  EXPECT_EQ(r.extractable_length, qrng::extractable_length(200'000, r.conditional_min_entropy_final, 1e-20));
  EXPECT_LE(static_cast<double>(r.extractable_length), 200'000 * r.conditional_min_entropy_final);
  EXPECT_LE(r.min_entropy_unconditional, r.shannon_total);
  EXPECT_LE(r.conditional_min_entropy_final, r.min_entropy_unconditional + 1e-9);
  EXPECT_EQ(r, qrng::certify(on, off, params));
}

TEST(Certify, EffectiveWidthOverrideAndMeasuredCollapse) {
  const QuantizerSpec q(4.0, 4);
  std::vector<std::uint64_t> on(16, 0), off(16, 0);
  on[4] = on[8] = on[12] = 100;  // gaps of three missing codes
  off[8] = 300;
  qrng::CertifyParams params;
  params.effective_width = 0.25;
  params.measured_collapse = true;
  const auto r = qrng::certify(hist_from(on, q), hist_from(off, q), params);
  EXPECT_EQ(r.effective_width, 0.25);
  EXPECT_EQ(r.max_preimage, 4u);
  EXPECT_EQ(r.adc_penalty, 2.0);
}

TEST(Calibration, FindsVarianceForTargetEntropy) {
  const QuantizerSpec q(2048.0, 12);
  for (double target : {2.520, 4.518, 8.0}) {
    const double v = qrng::variance_for_shannon(target, q);
    EXPECT_NEAR(qrng::discretized_shannon(v, q), target, 1e-9);
  }
  EXPECT_THROW(qrng::variance_for_shannon(12.5, q), qrng::ConfigError);
  EXPECT_THROW(qrng::variance_for_shannon(0.5, q), qrng::ConfigError);
}

}  // namespace
