#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hybridspin {

enum class ErrorKind {
  InvalidArgument,
  NotHermitian,
  AmbiguousLabeling,
  FitDiverged,
  DegenerateData,
  NonFiniteInput,
  ZeroShape,
  ParseError,
  NonMonotoneDepth,
  NegativeDensity,
  NoDecay,
  GridMismatch,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// that front ends (CLI exit codes, Python exceptions) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hybridspin
