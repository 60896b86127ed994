#pragma once

#include <stdexcept>
#include <string>

namespace qrng {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid or inconsistent configuration (types, sessions, extractor specs).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ParseErrorKind {
  bad_magic,
  unsupported_version,
  malformed_header,
  truncated_payload,
  trailing_bytes,
  code_out_of_range,
  empty_block,
  bad_field,
};

inline const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::bad_magic: return "bad_magic";
    case ParseErrorKind::unsupported_version: return "unsupported_version";
    case ParseErrorKind::malformed_header: return "malformed_header";
    case ParseErrorKind::truncated_payload: return "truncated_payload";
    case ParseErrorKind::trailing_bytes: return "trailing_bytes";
    case ParseErrorKind::code_out_of_range: return "code_out_of_range";
    case ParseErrorKind::empty_block: return "empty_block";
    case ParseErrorKind::bad_field: return "bad_field";
  }
  return "unknown";
}

// Failure to decode a persisted artifact (raw sample file, bit file, stage JSON).
class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ParseErrorKind kind() const noexcept { return kind_; }

 private:
  ParseErrorKind kind_;
};

}  // namespace qrng
