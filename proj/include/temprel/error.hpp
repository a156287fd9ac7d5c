#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace temprel {

/// Bad or incomplete run configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DataErrorKind {
  Io,
  Parse,
  Schema,
  DanglingEvent,
  DuplicatePair,
  DuplicateId,
  TokenOutOfRange,
  DimensionMismatch,
  HeaderMismatch,
  DuplicateEntry,
  MissingContext,
  BadLabel,
  NegativeCount,
  MissingPrediction,
  Inconsistent,
  Precondition,
};

std::string to_string(DataErrorKind kind);

/// Malformed or inconsistent input data (CLI exit code 3). `line` is 1-based,
/// 0 when not tied to a line.
class DataError : public std::runtime_error {
 public:
  DataError(DataErrorKind kind, const std::string& what, std::size_t line = 0);

  DataErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  DataErrorKind kind_;
  std::size_t line_;
};

}  // namespace temprel
