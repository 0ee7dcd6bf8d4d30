#include "avm/error.hpp"

namespace avm {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::WeightViolation: return "WeightViolation";
    case ErrorKind::ForbiddenPair: return "ForbiddenPair";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DimensionError: return "DimensionError";
    case ErrorKind::InvalidNoise: return "InvalidNoise";
    case ErrorKind::WrongRegime: return "WrongRegime";
    case ErrorKind::DegenerateScale: return "DegenerateScale";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::ConditionViolated: return "ConditionViolated";
    case ErrorKind::IndexError: return "IndexError";
    case ErrorKind::NotInvertible: return "NotInvertible";
    case ErrorKind::DegenerateRoot: return "DegenerateRoot";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace avm
