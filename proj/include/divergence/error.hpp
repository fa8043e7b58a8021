#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace divergence {

enum class ErrorCode {
  EmptySupport,
  NonPositiveWeight,
  MalformedChain,
  BudgetExceeded,
  OracleInconsistent,
  DegenerateDrift,
  PreconditionViolated,
  NotTransient,
  NotUncontrolled,
  NotIncreasing,
  ParseError,
  ValidationError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::MalformedChain: return "MalformedChain";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::OracleInconsistent: return "OracleInconsistent";
    case ErrorCode::DegenerateDrift: return "DegenerateDrift";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::NotTransient: return "NotTransient";
    case ErrorCode::NotUncontrolled: return "NotUncontrolled";
    case ErrorCode::NotIncreasing: return "NotIncreasing";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when an exploration runs out of states or time. Carries the number
// of states explored so far.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::size_t explored, const std::string& what)
      : Error(ErrorCode::BudgetExceeded, what), explored_(explored) {}

  std::size_t explored() const noexcept { return explored_; }

 private:
  std::size_t explored_;
};

}  // namespace divergence
