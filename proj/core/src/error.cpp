#include "condquant/error.hpp"

namespace condquant {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptySpace: return "EmptySpace";
    case ErrorCode::NonPositiveProbability: return "NonPositiveProbability";
    case ErrorCode::ProbabilitiesDoNotSumToOne: return "ProbabilitiesDoNotSumToOne";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::InvalidFiltration: return "InvalidFiltration";
    case ErrorCode::UnknownAtom: return "UnknownAtom";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ScoreNotIntegrable: return "ScoreNotIntegrable";
    case ErrorCode::DegenerateScore: return "DegenerateScore";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::NotMeasurable: return "NotMeasurable";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::MissingSecondDerivative: return "MissingSecondDerivative";
    case ErrorCode::NumericOverflow: return "NumericOverflow";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

}  // namespace condquant
