#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qrng/acquisition.hpp"
#include "qrng/bits.hpp"
#include "qrng/entropy.hpp"
#include "qrng/errors.hpp"
#include "qrng/rng.hpp"

namespace qrng {

// An output_len x input_len Toeplitz matrix over GF(2), fully determined by a
// seed of input_len + output_len - 1 bits: entry (i, j) = seed[i - j + input_len - 1].
struct ToeplitzSpec {
  std::size_t input_len = 900;
  std::size_t output_len = 200;
  BitBlock seed;

  std::size_t seed_len() const noexcept { return input_len + output_len - 1; }

  void validate() const {
    if (input_len == 0 || output_len == 0) throw ConfigError("toeplitz: dimensions must be > 0");
    if (output_len > input_len)
      throw ConfigError("toeplitz: output length " + std::to_string(output_len) + " exceeds input length " +
                        std::to_string(input_len));
    if (seed.size() != seed_len())
      throw ConfigError("toeplitz: seed has " + std::to_string(seed.size()) + " bits, need " +
                        std::to_string(seed_len()));
  }
};

// Seed expansion from a 64-bit value (SplitMix64 stream, LSB first per word).
inline BitBlock toeplitz_seed_from_u64(std::size_t length, std::uint64_t value) {
  SplitMix64 gen(value);
  BitBlock seed;
  while (seed.size() < length) {
    const std::uint64_t w = gen.next();
    for (int k = 0; k < 64 && seed.size() < length; ++k) seed.push_back((w >> k) & 1u);
  }
  return seed;
}

inline BitBlock toeplitz_seed_from_os(std::size_t length) {
  std::random_device rd;
  BitBlock seed;
  while (seed.size() < length) {
    const std::uint32_t w = rd();
    for (int k = 0; k < 32 && seed.size() < length; ++k) seed.push_back((w >> k) & 1u);
  }
  return seed;
}

// Implicit Toeplitz operator. Row i of the matrix is the window
// reversed_seed[m-1-i, m-1-i+n), so each row is read straight out of the
// reversed seed with word shifts and the matrix is never stored.
class ToeplitzOperator {
 public:
  explicit ToeplitzOperator(ToeplitzSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const std::size_t len = spec_.seed_len();
    reversed_.assign((len + 63) / 64 + 1, 0);
    for (std::size_t k = 0; k < len; ++k)
      if (spec_.seed.get(len - 1 - k)) reversed_[k / 64] |= std::uint64_t{1} << (k % 64);
  }

  const ToeplitzSpec& spec() const noexcept { return spec_; }
  std::size_t input_len() const noexcept { return spec_.input_len; }
  std::size_t output_len() const noexcept { return spec_.output_len; }

  bool entry(std::size_t i, std::size_t j) const noexcept { return spec_.seed.get(i + spec_.input_len - 1 - j); }

  // T * x over GF(2).
  BitBlock apply(const BitBlock& input) const {
    if (input.size() != spec_.input_len)
      throw DomainError("toeplitz: input has " + std::to_string(input.size()) + " bits, operator expects " +
                        std::to_string(spec_.input_len));
    const auto x = input.words();
    BitBlock out(spec_.output_len);
    for (std::size_t i = 0; i < spec_.output_len; ++i) {
      const std::size_t offset = spec_.output_len - 1 - i;
      const std::size_t base = offset / 64;
      const unsigned shift = offset % 64;
      std::uint64_t acc = 0;
      if (shift == 0) {
        for (std::size_t w = 0; w < x.size(); ++w) acc ^= reversed_[base + w] & x[w];
      } else {
        for (std::size_t w = 0; w < x.size(); ++w) {
          const std::uint64_t row = (reversed_[base + w] >> shift) | (reversed_[base + w + 1] << (64 - shift));
          acc ^= row & x[w];
        }
      }
      out.set(i, std::popcount(acc) & 1);
    }
    return out;
  }

 private:
  ToeplitzSpec spec_;
  std::vector<std::uint64_t> reversed_;  // one spare zero word for shifted reads
};

inline ToeplitzOperator build_matrix(ToeplitzSpec spec) { return ToeplitzOperator(std::move(spec)); }

inline BitBlock extract_block(const ToeplitzOperator& op, const BitBlock& input) { return op.apply(input); }

// ADC codes as bits, `bits` per code, most significant bit first.
inline BitBlock codes_to_bits(const SampleBlock& block) {
  BitBlock out;
  const int b = block.quantizer().bits();
  for (auto c : block.codes()) out.append_msb_first(c, b);
  return out;
}

struct ExtractionResult {
  BitBlock bits;
  std::uint64_t raw_bits = 0;
  std::uint64_t budget = 0;
  std::size_t blocks_available = 0;
  std::size_t blocks_used = 0;
  bool truncated = false;
  std::vector<std::string> warnings;
};

// Splits the input into input_len-bit blocks (an incomplete tail is dropped),
// hashes them in order and stops once `budget` output bits are reached.
inline ExtractionResult extract_with_budget(const ToeplitzOperator& op, const BitBlock& input, std::uint64_t budget) {
  if (input.size() < op.input_len())
    throw DomainError("extract: " + std::to_string(input.size()) + " input bits, one block needs " +
                      std::to_string(op.input_len()));
  ExtractionResult r;
  r.raw_bits = input.size();
  r.budget = budget;
  r.blocks_available = input.size() / op.input_len();
  if (budget == 0) {
    r.warnings.push_back("extraction budget is zero; no bits extracted");
    return r;
  }
  const std::uint64_t needed = budget / op.output_len() + (budget % op.output_len() != 0);
  r.blocks_used = static_cast<std::size_t>(std::min<std::uint64_t>(r.blocks_available, needed));
  for (std::size_t k = 0; k < r.blocks_used; ++k)
    r.bits.append(op.apply(input.slice(k * op.input_len(), op.input_len())));
  if (r.bits.size() > budget) {
    r.bits.truncate(budget);
    r.truncated = true;
  }
  return r;
}

// Extraction from an LO_ON sample block with the leftover-hash budget
// extractable_length(l, h_min, epsilon_hash).
inline ExtractionResult extract_stream(const ToeplitzOperator& op, const SampleBlock& samples, double h_min_per_sample,
                                       double epsilon_hash) {
  const std::uint64_t budget =
      h_min_per_sample > 0.0 ? extractable_length(samples.size(), h_min_per_sample, epsilon_hash) : 0;
  return extract_with_budget(op, codes_to_bits(samples), budget);
}

}  // namespace qrng
