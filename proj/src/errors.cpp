#include "krf/errors.hpp"

namespace krf {

std::string_view error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::PositivityViolation: return "PositivityViolation";
    case ErrorCode::DifferentiationFailure: return "DifferentiationFailure";
    case ErrorCode::EigenSolveFailure: return "EigenSolveFailure";
    case ErrorCode::ConditioningFailure: return "ConditioningFailure";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::PathTooCoarse: return "PathTooCoarse";
    case ErrorCode::StepRejectionLimit: return "StepRejectionLimit";
    case ErrorCode::RootNotBracketed: return "RootNotBracketed";
    case ErrorCode::InsufficientTail: return "InsufficientTail";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace krf
