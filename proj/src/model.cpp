#include "commoncv/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "commoncv/error.hpp"

namespace commoncv {

namespace {

constexpr double kZeroMeanTolerance = 1e-12;

void check_moments(std::int64_t n, double mean, double sd, double scale) {
  if (n < 2) {
    throw Error(ErrorCode::TooFewObservations,
                "at least 2 observations are required, got " + std::to_string(n));
  }
  if (!std::isfinite(mean) || !std::isfinite(sd)) {
    throw Error(ErrorCode::NonFiniteValue, "mean and sd must be finite");
  }
  if (!(sd > 0.0)) {
    throw Error(ErrorCode::ZeroVariance, "standard deviation must be positive");
  }
  if (std::abs(mean) < kZeroMeanTolerance * std::max(1.0, scale)) {
    throw Error(ErrorCode::ZeroMean, "mean is zero; the coefficient of variation is undefined");
  }
}

}  // namespace

SampleSummary SampleSummary::from_moments(std::int64_t n, double mean, double sd) {
  check_moments(n, mean, sd, sd);
  return SampleSummary(n, mean, sd);
}

SampleSummary summarize(std::span<const double> observations) {
  const auto n = static_cast<std::int64_t>(observations.size());
  if (n < 2) {
    throw Error(ErrorCode::TooFewObservations,
                "at least 2 observations are required, got " + std::to_string(n));
  }
  double max_abs = 0.0;
  for (double x : observations) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteValue, "observation is not finite");
    max_abs = std::max(max_abs, std::abs(x));
  }
  const double mean =
      std::accumulate(observations.begin(), observations.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : observations) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) {
    throw Error(ErrorCode::ZeroVariance, "all observations are identical");
  }
  check_moments(n, mean, sd, max_abs);
  return SampleSummary(n, mean, sd);
}

Study::Study(std::vector<SampleSummary> groups, std::vector<std::string> labels)
    : groups_(std::move(groups)), labels_(std::move(labels)) {
  for (const auto& g : groups_) total_n_ += g.n();
}

Study Study::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw Error(ErrorCode::InvalidArgument, "scale factor must be positive and finite");
  }
  std::vector<SampleSummary> out;
  out.reserve(groups_.size());
  for (const auto& g : groups_) {
    out.push_back(SampleSummary::from_moments(g.n(), c * g.mean(), c * g.sd()));
  }
  return validate_study(std::move(out), labels_);
}

Study validate_study(std::vector<SampleSummary> groups, std::vector<std::string> labels) {
  if (groups.size() < 2) {
    throw Error(ErrorCode::TooFewGroups,
                "at least 2 groups are required, got " + std::to_string(groups.size()));
  }
  labels.resize(groups.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].empty()) labels[i] = std::to_string(i + 1);
  }
  return Study(std::move(groups), std::move(labels));
}

Study validate_study(std::span<const GroupMoments> groups) {
  std::vector<SampleSummary> summaries;
  std::vector<std::string> labels;
  summaries.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    try {
      summaries.push_back(SampleSummary::from_moments(g.n, g.mean, g.sd));
    } catch (const Error& e) {
      const std::string name = g.label.empty() ? std::to_string(i + 1) : g.label;
      throw Error(e.code(), "group " + name + ": " + e.what(), i);
    }
    labels.push_back(g.label);
  }
  return validate_study(std::move(summaries), std::move(labels));
}

ParameterVector::ParameterVector(double phi, std::vector<double> sigmas)
    : phi_(phi), sigmas_(std::move(sigmas)) {
  if (!std::isfinite(phi_) || phi_ == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "phi must be finite and nonzero");
  }
  for (std::size_t i = 0; i < sigmas_.size(); ++i) {
    if (!(sigmas_[i] > 0.0) || !std::isfinite(sigmas_[i])) {
      throw Error(ErrorCode::NonPositiveSigma, "sigma must be positive and finite", i);
    }
  }
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::Tian: return "tian";
    case Method::VerrillJohnson: return "vj";
    case Method::New: return "new";
    case Method::Combined: return "combined";
  }
  return "?";
}

std::string_view to_string(Alternative a) noexcept {
  switch (a) {
    case Alternative::Greater: return "greater";
    case Alternative::TwoSided: return "two-sided";
    case Alternative::Less: return "less";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view s) noexcept {
  if (s == "tian") return Method::Tian;
  if (s == "vj") return Method::VerrillJohnson;
  if (s == "new") return Method::New;
  if (s == "combined") return Method::Combined;
  return std::nullopt;
}

std::optional<Alternative> parse_alternative(std::string_view s) noexcept {
  if (s == "greater") return Alternative::Greater;
  if (s == "less") return Alternative::Less;
  if (s == "two-sided") return Alternative::TwoSided;
  return std::nullopt;
}

}  // namespace commoncv
