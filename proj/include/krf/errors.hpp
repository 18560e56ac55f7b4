#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace krf {

// Numeric values are part of the CLI contract (process exit codes and the
// manifest's error field); never renumber.
enum class ErrorCode : int {
  GridTooSmall = 10,
  PositivityViolation = 11,
  DifferentiationFailure = 12,
  EigenSolveFailure = 13,
  ConditioningFailure = 20,
  IndexOutOfRange = 30,
  PathTooCoarse = 31,
  StepRejectionLimit = 40,
  RootNotBracketed = 41,
  InsufficientTail = 42,
  ParseError = 50,
  RangeError = 51,
  IoError = 60,
  Internal = 70,
};

std::string_view error_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& what);

}  // namespace krf
