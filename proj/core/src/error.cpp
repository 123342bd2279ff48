#include "ruelle/error.hpp"

namespace ruelle {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonSquareMatrix: return "NonSquareMatrix";
    case ErrorCode::kNonBinaryEntry: return "NonBinaryEntry";
    case ErrorCode::kZeroColumn: return "ZeroColumn";
    case ErrorCode::kInadmissibleWord: return "InadmissibleWord";
    case ErrorCode::kDepthDowngrade: return "DepthDowngrade";
    case ErrorCode::kDepthTooShallow: return "DepthTooShallow";
    case ErrorCode::kNegativeWeight: return "NegativeWeight";
    case ErrorCode::kNotSubNormalized: return "NotSubNormalized";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kMonotonicityViolation: return "MonotonicityViolation";
    case ErrorCode::kDegenerateH: return "DegenerateH";
    case ErrorCode::kMassCollapse: return "MassCollapse";
    case ErrorCode::kNotFixedPoint: return "NotFixedPoint";
    case ErrorCode::kZeroMassConditioning: return "ZeroMassConditioning";
    case ErrorCode::kFilterMismatch: return "FilterMismatch";
    case ErrorCode::kConfig: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace ruelle
