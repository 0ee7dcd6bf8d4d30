#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace avm {

enum class ErrorKind {
  WeightViolation,
  ForbiddenPair,
  DimensionMismatch,
  DimensionError,
  InvalidNoise,
  WrongRegime,
  DegenerateScale,
  NonFiniteState,
  RangeError,
  ConditionViolated,
  IndexError,
  NotInvertible,
  DegenerateRoot,
  TooShort,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a simulated state leaves the finite range.
class NonFiniteStateError : public Error {
 public:
  NonFiniteStateError(long first_bad_t, const std::string& what)
      : Error(ErrorKind::NonFiniteState, what), first_bad_t_(first_bad_t) {}

  long first_bad_t() const noexcept { return first_bad_t_; }

 private:
  long first_bad_t_;
};

}  // namespace avm
