#include "hybridspin/error.hpp"

namespace hybridspin {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::AmbiguousLabeling: return "AmbiguousLabeling";
    case ErrorKind::FitDiverged: return "FitDiverged";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::ZeroShape: return "ZeroShape";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonMonotoneDepth: return "NonMonotoneDepth";
    case ErrorKind::NegativeDensity: return "NegativeDensity";
    case ErrorKind::NoDecay: return "NoDecay";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace hybridspin
