#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pev {

enum class ErrorKind {
  SingularMatrix,
  NotPSD,
  InvalidDimensions,
  FieldSizeMismatch,
  NoConvergence,
  OutOfRange,
  InvalidBounds,
  NoProgress,
  DegenerateDenominator,
  SingularInner,
  SingularQ,
  Validation,
  Io,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::InvalidDimensions: return "InvalidDimensions";
    case ErrorKind::FieldSizeMismatch: return "FieldSizeMismatch";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::InvalidBounds: return "InvalidBounds";
    case ErrorKind::NoProgress: return "NoProgress";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::SingularInner: return "SingularInner";
    case ErrorKind::SingularQ: return "SingularQ";
    case ErrorKind::Validation: return "Validation";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` tells callers what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pev
