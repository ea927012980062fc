#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace woven {

enum class ErrorCode {
  NonSquare,
  NotSymmetric,
  DidNotConverge,
  NotPositiveDefinite,
  DimensionMismatch,
  ShapeMismatch,
  InvalidFrame,
  NotAFrame,
  NotRieszBasis,
  BadParams,
  BadPartition,
  TooLargeForExhaustive,
  ZeroSubspace,
  NotInvertible,
  NotRedundant,
  HypothesisFailed,
  NotDualPair,
  NotWovenRieszBases,
  BudgetExceeded,
  ZeroVector,
  NotOrthonormal,
  BadScalars,
  ParseError,
  SchemaViolation,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::DidNotConverge: return "DidNotConverge";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidFrame: return "InvalidFrame";
    case ErrorCode::NotAFrame: return "NotAFrame";
    case ErrorCode::NotRieszBasis: return "NotRieszBasis";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::BadPartition: return "BadPartition";
    case ErrorCode::TooLargeForExhaustive: return "TooLargeForExhaustive";
    case ErrorCode::ZeroSubspace: return "ZeroSubspace";
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::NotRedundant: return "NotRedundant";
    case ErrorCode::HypothesisFailed: return "HypothesisFailed";
    case ErrorCode::NotDualPair: return "NotDualPair";
    case ErrorCode::NotWovenRieszBases: return "NotWovenRieszBases";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::BadScalars: return "BadScalars";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace woven
