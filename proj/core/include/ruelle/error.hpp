#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ruelle {

enum class ErrorCode {
  kInvalidArgument,
  kNonSquareMatrix,
  kNonBinaryEntry,
  kZeroColumn,
  kInadmissibleWord,
  kDepthDowngrade,
  kDepthTooShallow,
  kNegativeWeight,
  kNotSubNormalized,
  kNoConvergence,
  kMonotonicityViolation,
  kDegenerateH,
  kMassCollapse,
  kNotFixedPoint,
  kZeroMassConditioning,
  kFilterMismatch,
  kConfig,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this exception; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ruelle
