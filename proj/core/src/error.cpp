#include "fracsl/error.hpp"

namespace fracsl {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kDomain: return "DomainError";
    case ErrorKind::kNonFiniteBlowup: return "NonFiniteBlowup";
    case ErrorKind::kBracketFailure: return "BracketFailure";
    case ErrorKind::kResidualTooLarge: return "ResidualTooLarge";
    case ErrorKind::kInsufficientModes: return "InsufficientModes";
    case ErrorKind::kQuadratureNonConvergence: return "QuadratureNonConvergence";
    case ErrorKind::kTruncationTooCoarse: return "TruncationTooCoarse";
    case ErrorKind::kIncompatibleGrids: return "IncompatibleGrids";
    case ErrorKind::kLinearSolveFailure: return "LinearSolveFailure";
    case ErrorKind::kNearPole: return "NearPole";
    case ErrorKind::kFitFailure: return "FitFailure";
    case ErrorKind::kZeroEigenvalue: return "ZeroEigenvalue";
    case ErrorKind::kNearZeroDenominator: return "NearZeroDenominator";
    case ErrorKind::kDivergenceDetected: return "DivergenceDetected";
    case ErrorKind::kJacobianRankDeficient: return "JacobianRankDeficient";
    case ErrorKind::kMissingColumn: return "MissingColumn";
    case ErrorKind::kEmptyData: return "EmptyData";
  }
  return "UnknownError";
}

}  // namespace fracsl
