#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracsl {

/// Failure categories raised by the numerical modules. The CLI maps any of
/// these to exit status 3 and records the name in the run manifest.
enum class ErrorKind {
  kDomain,
  kNonFiniteBlowup,
  kBracketFailure,
  kResidualTooLarge,
  kInsufficientModes,
  kQuadratureNonConvergence,
  kTruncationTooCoarse,
  kIncompatibleGrids,
  kLinearSolveFailure,
  kNearPole,
  kFitFailure,
  kZeroEigenvalue,
  kNearZeroDenominator,
  kDivergenceDetected,
  kJacobianRankDeficient,
  kMissingColumn,
  kEmptyData,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace fracsl
