#include "medcal/error.hpp"

namespace medcal {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kAlreadyNormalized: return "AlreadyNormalized";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kCapacityExceeded: return "CapacityExceeded";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kDegenerateData: return "DegenerateData";
    case ErrorCode::kBudgetOutOfRange: return "BudgetOutOfRange";
    case ErrorCode::kBudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::kInvalidDelta: return "InvalidDelta";
    case ErrorCode::kUnknownStrategy: return "UnknownStrategy";
    case ErrorCode::kEmptyQuery: return "EmptyQuery";
    case ErrorCode::kNormalizationMismatch: return "NormalizationMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedHeader:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kNonFiniteValue:
    case ErrorCode::kDuplicateId:
    case ErrorCode::kIoFailure:
    case ErrorCode::kBudgetOutOfRange:
    case ErrorCode::kNormalizationMismatch:
    case ErrorCode::kInvalidArgument:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(message) {}

}  // namespace medcal
