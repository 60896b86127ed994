#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qrng/acquisition.hpp"
#include "qrng/errors.hpp"
#include "qrng/file_io.hpp"

namespace qrng {

// Raw sample file, little-endian throughout:
//
//   offset  size  field
//   0       4     magic "QRNG"
//   4       1     version (1)
//   5       1     bits per code
//   6       8     range R, IEEE-754 binary64
//   14      1     configuration tag (0 LO_SWEEP, 1 LO_OFF, 2 LO_ON)
//   15      8     sample count (u64, > 0)
//   23      2*N   codes, u16 each
inline constexpr std::array<std::uint8_t, 4> raw_magic{'Q', 'R', 'N', 'G'};
inline constexpr std::uint8_t raw_version = 1;
inline constexpr std::size_t raw_header_size = 23;

inline std::vector<std::uint8_t> encode_raw(const SampleBlock& block) {
  if (block.empty()) throw DomainError("encode_raw: empty sample block");
  std::vector<std::uint8_t> out(raw_header_size + 2 * block.size());
  std::copy(raw_magic.begin(), raw_magic.end(), out.begin());
  out[4] = raw_version;
  out[5] = static_cast<std::uint8_t>(block.quantizer().bits());
  const auto put = [&out](std::size_t at, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
  };
  put(6, std::bit_cast<std::uint64_t>(block.quantizer().range()));
  out[14] = static_cast<std::uint8_t>(block.tag());
  put(15, block.size());
  std::size_t at = raw_header_size;
  for (auto c : block.codes()) {
    out[at++] = static_cast<std::uint8_t>(c & 0xFF);
    out[at++] = static_cast<std::uint8_t>(c >> 8);
  }
  return out;
}

inline SampleBlock decode_raw(std::span<const std::uint8_t> in) {
  if (in.size() < raw_header_size)
    throw ParseError(ParseErrorKind::malformed_header, "header needs " + std::to_string(raw_header_size) +
                                                           " bytes, file has " + std::to_string(in.size()));
  if (!std::equal(raw_magic.begin(), raw_magic.end(), in.begin()))
    throw ParseError(ParseErrorKind::bad_magic, "expected \"QRNG\"");
  if (in[4] != raw_version)
    throw ParseError(ParseErrorKind::unsupported_version, "version " + std::to_string(in[4]));

  const int bits = in[5];
  const double range = std::bit_cast<double>(le::get_u64(in.subspan(6, 8)));
  if (bits < QuantizerSpec::min_bits || bits > QuantizerSpec::max_bits)
    throw ParseError(ParseErrorKind::malformed_header, "bits " + std::to_string(bits) + " not supported");
  if (!(std::isfinite(range) && range > 0.0))
    throw ParseError(ParseErrorKind::malformed_header, "range must be finite and > 0");
  const auto tag = configuration_from_byte(in[14]);
  if (!tag) throw ParseError(ParseErrorKind::malformed_header, "configuration tag " + std::to_string(in[14]));
  const std::uint64_t count = le::get_u64(in.subspan(15, 8));
  if (count == 0) throw ParseError(ParseErrorKind::empty_block, "sample count is zero");

  const auto payload = in.subspan(raw_header_size);
  if (payload.size() / 2 < count)
    throw ParseError(ParseErrorKind::truncated_payload, "header declares " + std::to_string(count) +
                                                            " samples, payload holds " +
                                                            std::to_string(payload.size() / 2));
  if (payload.size() != 2 * count)
    throw ParseError(ParseErrorKind::trailing_bytes, std::to_string(payload.size() - 2 * count) +
                                                         " bytes after the last sample");

  const QuantizerSpec q(range, bits);
  std::vector<std::uint16_t> codes(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto c = static_cast<std::uint16_t>(payload[2 * i] | (payload[2 * i + 1] << 8));
    if (c >= q.cardinality())
      throw ParseError(ParseErrorKind::code_out_of_range, "code " + std::to_string(c) + " at index " +
                                                              std::to_string(i) + " exceeds " +
                                                              std::to_string(q.cardinality() - 1));
    codes[i] = c;
  }
  return SampleBlock(std::move(codes), q, *tag);
}

inline void store_raw(const SampleBlock& block, const std::filesystem::path& path) {
  write_file_atomic(path, encode_raw(block));
}

inline SampleBlock load_raw(const std::filesystem::path& path) { return decode_raw(read_file_bytes(path)); }

}  // namespace qrng
