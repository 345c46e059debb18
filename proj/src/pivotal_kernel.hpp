#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "commoncv/model.hpp"
#include "commoncv/randgen.hpp"

namespace commoncv::detail {

// Per-replicate attempts before a replicate is declared hopeless.
inline constexpr int kMaxAttempts = 64;
inline constexpr double kMaxRejectedFraction = 0.01;

inline std::uint64_t replicate_stream_id(std::int64_t replicate, int attempt) {
  const std::uint64_t base = derive_stream_id(static_cast<std::uint64_t>(replicate), kRolePivotal);
  return attempt == 0 ? base : combine_keys(base, static_cast<std::uint64_t>(attempt));
}

// Study constants hoisted out of the replicate loop. The arithmetic below
// must stay expression-for-expression identical to t1_draw / t2_draw.
class PivotalKernel {
 public:
  explicit PivotalKernel(const Study& study) {
    for (const auto& g : study.groups()) {
      const double n = static_cast<double>(g.n());
      df_.push_back(g.n() - 1);
      df_real_.push_back(n - 1.0);
      sqrt_df_.push_back(std::sqrt(n - 1.0));
      sqrt_n_.push_back(std::sqrt(n));
      n_.push_back(n);
      ratio_.push_back(g.inverse_cv());
      df_total_ += n - 1.0;
      n_total_ += n;
    }
    sqrt_n_total_ = std::sqrt(n_total_);
  }

  std::size_t k() const noexcept { return n_.size(); }

  // Draws the base variates into u and z and evaluates both pivotals.
  // Returns false for a degenerate replicate.
  bool evaluate(SeededStream& stream, std::vector<double>& u, std::vector<double>& z, double& t1,
                double& t2) const {
    const std::size_t k = n_.size();
    for (std::size_t i = 0; i < k; ++i) u[i] = chi_square(stream, df_[i]);
    for (std::size_t i = 0; i < k; ++i) z[i] = standard_normal(stream);
    const double z_common = standard_normal(stream);

    double sum1 = 0.0;
    double denom2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double d = ratio_[i] * std::sqrt(u[i] / df_real_[i]) - z[i] / sqrt_n_[i];
      if (d == 0.0 || !std::isfinite(d)) return false;
      sum1 += df_real_[i] / d;
      denom2 += n_[i] * std::sqrt(u[i]) / sqrt_df_[i] * ratio_[i];
    }
    denom2 -= sqrt_n_total_ * z_common;
    if (denom2 == 0.0 || !std::isfinite(denom2)) return false;
    t1 = sum1 / df_total_;
    t2 = n_total_ / denom2;
    return std::isfinite(t1) && std::isfinite(t2);
  }

 private:
  std::vector<std::int64_t> df_;
  std::vector<double> df_real_, sqrt_df_, sqrt_n_, n_, ratio_;
  double df_total_ = 0.0;
  double n_total_ = 0.0;
  double sqrt_n_total_ = 0.0;
};

}  // namespace commoncv::detail
