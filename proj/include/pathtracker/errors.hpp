#pragma once

#include <stdexcept>
#include <string>

namespace pathtracker {

/// Invalid parameters or an impossible request (CLI exit code 1).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class DataErrorKind {
  io,
  bad_magic,
  checksum,
  truncated,
  dimension_mismatch,
  count_mismatch,
  malformed,
  missing_index,
  unknown_label,
  index_out_of_range,
  length_mismatch,
  empty_input,
};

const char* to_string(DataErrorKind kind);

/// Anything wrong with data on disk or handed in by a caller (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  DataError(DataErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  DataErrorKind kind() const noexcept { return kind_; }

 private:
  DataErrorKind kind_;
};

/// Sample generation gave up after exhausting its resampling budget (CLI exit code 3).
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The oracle tracker could not follow a sample (CLI exit code 3).
class TrackingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pathtracker
