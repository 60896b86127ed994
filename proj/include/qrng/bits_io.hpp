#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qrng/bits.hpp"
#include "qrng/errors.hpp"
#include "qrng/file_io.hpp"

namespace qrng {

// Extracted bit file:
//
//   0   4   magic "QRBT"
//   4   1   version (1)
//   5   8   bit length L (u64, little-endian)
//   13  ⌈L/8⌉ packed bits, most significant bit first, zero padded
inline constexpr std::array<std::uint8_t, 4> bits_magic{'Q', 'R', 'B', 'T'};
inline constexpr std::uint8_t bits_version = 1;
inline constexpr std::size_t bits_header_size = 13;

inline std::vector<std::uint8_t> encode_bits(const BitBlock& bits) {
  std::vector<std::uint8_t> out(bits_magic.begin(), bits_magic.end());
  out.push_back(bits_version);
  le::put_u64(out, bits.size());
  const auto packed = bits.to_bytes();
  out.insert(out.end(), packed.begin(), packed.end());
  return out;
}

inline BitBlock decode_bits(std::span<const std::uint8_t> in) {
  if (in.size() < bits_header_size)
    throw ParseError(ParseErrorKind::malformed_header, "bit file header needs " + std::to_string(bits_header_size) +
                                                           " bytes, file has " + std::to_string(in.size()));
  if (!std::equal(bits_magic.begin(), bits_magic.end(), in.begin()))
    throw ParseError(ParseErrorKind::bad_magic, "expected \"QRBT\"");
  if (in[4] != bits_version)
    throw ParseError(ParseErrorKind::unsupported_version, "bit file version " + std::to_string(in[4]));
  const std::uint64_t length = le::get_u64(in.subspan(5, 8));
  const auto payload = in.subspan(bits_header_size);
  const std::uint64_t need = length / 8 + (length % 8 != 0);
  if (payload.size() < need)
    throw ParseError(ParseErrorKind::truncated_payload, "bit length " + std::to_string(length) + " needs " +
                                                            std::to_string(need) + " bytes, payload has " +
                                                            std::to_string(payload.size()));
  if (payload.size() > need)
    throw ParseError(ParseErrorKind::trailing_bytes, std::to_string(payload.size() - need) + " bytes after the last bit");
  if (length % 8 != 0 && (payload.back() & (0xFFu >> (length % 8))) != 0)
    throw ParseError(ParseErrorKind::bad_field, "padding bits after the last bit are not zero");
  return BitBlock::from_bytes(payload, static_cast<std::size_t>(length));
}

inline void store_bits(const BitBlock& bits, const std::filesystem::path& path) {
  write_file_atomic(path, encode_bits(bits));
}

inline BitBlock load_bits(const std::filesystem::path& path) { return decode_bits(read_file_bytes(path)); }

}  // namespace qrng
