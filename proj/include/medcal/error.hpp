#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace medcal {

enum class ErrorCode {
  kMalformedHeader,
  kDimensionMismatch,
  kNonFiniteValue,
  kDuplicateId,
  kIoFailure,
  kAlreadyNormalized,
  kZeroVector,
  kCapacityExceeded,
  kInvalidK,
  kDegenerateData,
  kBudgetOutOfRange,
  kBudgetTooSmall,
  kInvalidDelta,
  kUnknownStrategy,
  kEmptyQuery,
  kNormalizationMismatch,
  kInvalidArgument,
};

/// Stable name used in messages and reports, e.g. "DimensionMismatch".
std::string_view to_string(ErrorCode code);

/// True for errors caused by the input data or arguments rather than by
/// the selection step itself. The CLI maps these to exit code 2.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// Message without the error-name prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace medcal
