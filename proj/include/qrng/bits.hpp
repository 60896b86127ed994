#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qrng/errors.hpp"

namespace qrng {

// Packed bit string. Bit i lives in word i / 64 at position i % 64 (LSB first);
// pad bits past size() are always zero.
class BitBlock {
 public:
  BitBlock() = default;
  explicit BitBlock(std::size_t size) : words_((size + 63) / 64, 0), size_(size) {}

  static BitBlock from_bools(std::span<const bool> bits) {
    BitBlock b(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) b.set(i, bits[i]);
    return b;
  }

  // Accepts '0' and '1' only.
  static BitBlock from_string(std::string_view s) {
    BitBlock b(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '0' && s[i] != '1') throw DomainError("BitBlock: expected only '0' and '1'");
      b.set(i, s[i] == '1');
    }
    return b;
  }

  // Bytes are read most significant bit first.
  static BitBlock from_bytes(std::span<const std::uint8_t> bytes, std::size_t size) {
    if (size > bytes.size() * 8) throw DomainError("BitBlock: bit length exceeds byte payload");
    BitBlock b(size);
    for (std::size_t i = 0; i < size; ++i) b.set(i, (bytes[i / 8] >> (7 - i % 8)) & 1u);
    return b;
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  bool get(std::size_t i) const noexcept { return (words_[i / 64] >> (i % 64)) & 1u; }
  bool operator[](std::size_t i) const noexcept { return get(i); }

  void set(std::size_t i, bool v) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    if (v) words_[i / 64] |= mask;
    else words_[i / 64] &= ~mask;
  }

  void push_back(bool v) {
    if (size_ % 64 == 0) words_.push_back(0);
    ++size_;
    set(size_ - 1, v);
  }

  // Appends the low `count` bits of value, most significant first.
  void append_msb_first(std::uint64_t value, int count) {
    for (int k = count - 1; k >= 0; --k) push_back((value >> k) & 1u);
  }

  void append(const BitBlock& other) {
    if (size_ % 64 == 0) {
      words_.insert(words_.end(), other.words_.begin(), other.words_.end());
      size_ += other.size_;
      return;
    }
    for (std::size_t i = 0; i < other.size_; ++i) push_back(other.get(i));
  }

  BitBlock slice(std::size_t offset, std::size_t length) const {
    if (offset + length > size_) throw DomainError("BitBlock: slice out of range");
    BitBlock out(length);
    const std::size_t shift = offset % 64;
    const std::size_t base = offset / 64;
    for (std::size_t w = 0; w < out.words_.size(); ++w) {
      std::uint64_t lo = words_[base + w] >> shift;
      if (shift != 0 && base + w + 1 < words_.size()) lo |= words_[base + w + 1] << (64 - shift);
      out.words_[w] = lo;
    }
    out.clear_padding();
    return out;
  }

  void truncate(std::size_t length) {
    if (length >= size_) return;
    size_ = length;
    words_.resize((length + 63) / 64);
    clear_padding();
  }

  std::size_t popcount() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  BitBlock& operator^=(const BitBlock& other) {
    if (other.size_ != size_) throw DomainError("BitBlock: xor of different lengths");
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
    return *this;
  }
  friend BitBlock operator^(BitBlock a, const BitBlock& b) { return a ^= b; }

  // Packed bytes, most significant bit first, last byte zero-padded.
  std::vector<std::uint8_t> to_bytes() const {
    std::vector<std::uint8_t> out((size_ + 7) / 8, 0);
    for (std::size_t i = 0; i < size_; ++i)
      if (get(i)) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    return out;
  }

  std::string to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    for (auto b : to_bytes()) {
      s.push_back(digits[b >> 4]);
      s.push_back(digits[b & 0xF]);
    }
    return s;
  }

  std::string to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i)
      if (get(i)) s[i] = '1';
    return s;
  }

  friend bool operator==(const BitBlock&, const BitBlock&) = default;

 private:
  void clear_padding() noexcept {
    if (size_ % 64 != 0) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }

  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

inline BitBlock bits_from_hex(std::string_view hex, std::size_t size) {
  if (hex.size() % 2 != 0) throw DomainError("hex string has odd length");
  std::vector<std::uint8_t> bytes;
  bytes.reserve(hex.size() / 2);
  const auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw DomainError(std::string("invalid hex digit '") + c + "'");
  };
  for (std::size_t i = 0; i < hex.size(); i += 2)
    bytes.push_back(static_cast<std::uint8_t>(nibble(hex[i]) << 4 | nibble(hex[i + 1])));
  if (size > bytes.size() * 8) throw DomainError("hex string shorter than the requested bit length");
  return BitBlock::from_bytes(bytes, size);
}

}  // namespace qrng
