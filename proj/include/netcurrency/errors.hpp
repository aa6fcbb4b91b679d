#pragma once

#include <stdexcept>
#include <string>

namespace netcurrency {

enum class ErrorKind {
  InvalidArgument,
  SingularMatrix,
  NoConvergence,
  NotDecreasing,
  ParseError,
  SelfLoop,
  DuplicateEdge,
  NegativeWeight,
  DecayTooLarge,
  BetaTooSmall,
  NoIssuerIn,
  NodeSetMismatch,
  DerivativeAtZero,
  BudgetExceeded,
  NotComparable,
  ConfigError,
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotDecreasing: return "NotDecreasing";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SelfLoop: return "SelfLoop";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::NegativeWeight: return "NegativeWeight";
    case ErrorKind::DecayTooLarge: return "DecayTooLarge";
    case ErrorKind::BetaTooSmall: return "BetaTooSmall";
    case ErrorKind::NoIssuerIn: return "NoIssuerIn";
    case ErrorKind::NodeSetMismatch: return "NodeSetMismatch";
    case ErrorKind::DerivativeAtZero: return "DerivativeAtZero";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NotComparable: return "NotComparable";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

// Every failure raised by the library. what() is "<Kind>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace netcurrency
