#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace instaseg {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Inputs that are well-typed but violate a data contract
// (dimension mismatch, zero truth count, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid parameters (even structuring element, bad connectivity, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind {
  bad_magic,
  truncated,
  dimension_overflow,
  value_out_of_range,
  malformed_header,
  maxval_mismatch,
  trailing_data,
  non_contiguous_labels,
};

inline std::string_view to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::bad_magic: return "bad magic";
    case FormatErrorKind::truncated: return "truncated payload";
    case FormatErrorKind::dimension_overflow: return "dimension overflow";
    case FormatErrorKind::value_out_of_range: return "value out of range";
    case FormatErrorKind::malformed_header: return "malformed header";
    case FormatErrorKind::maxval_mismatch: return "maxval mismatch";
    case FormatErrorKind::trailing_data: return "trailing data";
    case FormatErrorKind::non_contiguous_labels: return "non-contiguous labels";
  }
  return "unknown";
}

// A file was readable but its content does not follow the expected format.
// `offset` is the byte offset at which the problem was detected.
class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, std::size_t offset, const std::string& detail = {})
      : Error(std::string(to_string(kind)) + " at byte " + std::to_string(offset) +
              (detail.empty() ? std::string() : ": " + detail)),
        kind_(kind),
        offset_(offset) {}

  FormatErrorKind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  FormatErrorKind kind_;
  std::size_t offset_;
};

}  // namespace instaseg
