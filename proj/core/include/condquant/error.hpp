#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace condquant {

enum class ErrorCode {
  EmptySpace,
  NonPositiveProbability,
  ProbabilitiesDoNotSumToOne,
  SpaceMismatch,
  InvalidPartition,
  InvalidFiltration,
  UnknownAtom,
  NonFiniteValue,
  AlphaOutOfRange,
  InvalidParameter,
  ScoreNotIntegrable,
  DegenerateScore,
  BracketFailure,
  MaxIterExceeded,
  NotMeasurable,
  InstanceTooLarge,
  MissingSecondDerivative,
  NumericOverflow,
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace condquant
