#pragma once

namespace commoncv {

/// Standard normal CDF.
double normal_cdf(double x) noexcept;

/// Standard normal quantile for 0 < p < 1. Rational initial approximation
/// refined by one Halley step against erfc; relative error well below 1e-12
/// across the open interval. Returns -inf/+inf at p = 0/1 and NaN outside.
double normal_quantile(double p) noexcept;

}  // namespace commoncv
