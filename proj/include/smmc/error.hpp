#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace smmc {

enum class ErrorKind {
  kSingularLeakage,
  kNonFiniteState,
  kZeroFlux,
  kEmptyBank,
  kLengthMismatch,
  kDimensionMismatch,
  kSingularCB,
  kSingularLyapunov,
  kNonPositiveWeight,
  kTooShortTrace,
  kEmptyTrace,
  kParseError,
  kValidationError,
  kIoError,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. Every failure carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSingularLeakage: return "SingularLeakage";
    case ErrorKind::kNonFiniteState: return "NonFiniteState";
    case ErrorKind::kZeroFlux: return "ZeroFlux";
    case ErrorKind::kEmptyBank: return "EmptyBank";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kSingularCB: return "SingularCB";
    case ErrorKind::kSingularLyapunov: return "SingularLyapunov";
    case ErrorKind::kNonPositiveWeight: return "NonPositiveWeight";
    case ErrorKind::kTooShortTrace: return "TooShortTrace";
    case ErrorKind::kEmptyTrace: return "EmptyTrace";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kValidationError: return "ValidationError";
    case ErrorKind::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace smmc
