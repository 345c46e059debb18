#include "commoncv/error.hpp"

namespace commoncv {

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DegenerateDenominator:
    case ErrorCode::DegenerateRate:
    case ErrorCode::SingularHessian:
    case ErrorCode::NoConvergence:
      return ErrorCategory::Numerical;
    case ErrorCode::IoError:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Validation;
  }
}

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::ZeroMean: return "ZeroMean";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::TooFewGroups: return "TooFewGroups";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidDf: return "InvalidDf";
    case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::NonPositiveChiSquare: return "NonPositiveChiSquare";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::DegenerateRate: return "DegenerateRate";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::NonNumericValue: return "NonNumericValue";
    case ErrorCode::InvalidCount: return "InvalidCount";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> group)
    : std::runtime_error(message), code_(code), group_(group) {}

}  // namespace commoncv
