#pragma once

#include <stdexcept>
#include <string>

namespace arinfo {

enum class ErrorCode {
  kNonFinite,
  kShapeMismatch,
  kNotSymmetric,
  kNotPsd,
  kNotInPiClass,
  kSNotContractive,
  kStrictSetEmpty,
  kPreconditionViolated,
  kHorizonTooShort,
  kRankDeficientHankel,
  kNotStrictlyProperClass,
  kQLNotZero,
  kIncompatibleData,
  kCertificateFailed,
  kMalformedProblem,
  kSingularMassMatrix,
  kEigenSolverFailure,
  kParseError,
  kIoError,
};

const char* to_string(ErrorCode code);

/// Library error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace arinfo
