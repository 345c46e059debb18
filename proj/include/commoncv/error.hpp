#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace commoncv {

enum class ErrorCode {
  // input validation
  TooFewObservations,
  ZeroVariance,
  ZeroMean,
  NonFiniteValue,
  TooFewGroups,
  InvalidArgument,
  InvalidDf,
  NonPositiveSigma,
  NonPositiveChiSquare,
  // numerical failures
  DegenerateDenominator,
  DegenerateRate,
  SingularHessian,
  NoConvergence,
  // file formats and I/O
  MalformedHeader,
  NonNumericValue,
  InvalidCount,
  IoError,
};

// Coarse classification used by the CLI to pick an exit code.
enum class ErrorCategory { Validation, Numerical, Io };

ErrorCategory category_of(ErrorCode code) noexcept;
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> group = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }
  // Zero-based index of the offending group, when the error is per-group.
  std::optional<std::size_t> group() const noexcept { return group_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> group_;
};

}  // namespace commoncv
