#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bsdd {

enum class ErrorCode {
  kNonSquare,
  kNonFinite,
  kDimensionMismatch,
  kSizeMismatch,
  kIndexOutOfRange,
  kNonSquareBlock,
  kNotHurwitz,
  kNotMetzler,
  kIterationFailure,
  kIterationBudgetExceeded,
  kSolverFailure,
  kNumericalFailure,
  kMissingScalings,
  kComparisonNotHurwitz,
  kRiccatiFailure,
  kNotBorderBlockDiagonal,
  kParseError,
};

std::string_view to_string(ErrorCode code);

/// All library failures are reported through this exception. Inconclusive
/// stability tests are results (empty optionals, report entries), not errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bsdd
