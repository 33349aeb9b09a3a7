#include "bsdd/error.h"

namespace bsdd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonSquare: return "NonSquare";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSizeMismatch: return "SizeMismatch";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kNonSquareBlock: return "NonSquareBlock";
    case ErrorCode::kNotHurwitz: return "NotHurwitz";
    case ErrorCode::kNotMetzler: return "NotMetzler";
    case ErrorCode::kIterationFailure: return "IterationFailure";
    case ErrorCode::kIterationBudgetExceeded: return "IterationBudgetExceeded";
    case ErrorCode::kSolverFailure: return "SolverFailure";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kMissingScalings: return "MissingScalings";
    case ErrorCode::kComparisonNotHurwitz: return "ComparisonNotHurwitz";
    case ErrorCode::kRiccatiFailure: return "RiccatiFailure";
    case ErrorCode::kNotBorderBlockDiagonal: return "NotBorderBlockDiagonal";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace bsdd
