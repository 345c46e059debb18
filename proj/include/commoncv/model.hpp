#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace commoncv {

class SampleSummary;
SampleSummary summarize(std::span<const double> observations);

/// Sufficient statistics of one normal sample. The standard deviation uses
/// the unbiased divisor n - 1, not n.
class SampleSummary {
 public:
  /// Validating constructor. Throws Error with TooFewObservations,
  /// ZeroVariance, ZeroMean or NonFiniteValue.
  static SampleSummary from_moments(std::int64_t n, double mean, double sd);

  std::int64_t n() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double sd() const noexcept { return sd_; }
  double variance() const noexcept { return sd_ * sd_; }
  double cv() const noexcept { return sd_ / mean_; }
  /// mean / sd; the only way the pivotal quantities see the data.
  double inverse_cv() const noexcept { return mean_ / sd_; }

 private:
  friend SampleSummary summarize(std::span<const double>);

  SampleSummary(std::int64_t n, double mean, double sd) : n_(n), mean_(mean), sd_(sd) {}

  std::int64_t n_;
  double mean_;
  double sd_;
};

/// Summarize raw observations (mean and n-1 standard deviation).
/// A mean is treated as zero when |mean| < 1e-12 * max(1, max |x|).
SampleSummary summarize(std::span<const double> observations);

/// Unvalidated per-group moments, as read from a file or built by hand.
struct GroupMoments {
  std::int64_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  std::string label;
};

/// An ordered collection of k >= 2 validated groups with optional labels.
class Study {
 public:
  std::size_t k() const noexcept { return groups_.size(); }
  std::int64_t total_n() const noexcept { return total_n_; }
  const std::vector<SampleSummary>& groups() const noexcept { return groups_; }
  const SampleSummary& group(std::size_t i) const { return groups_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }

  /// Same study with every mean and sd multiplied by c > 0.
  Study scaled(double c) const;

 private:
  friend Study validate_study(std::vector<SampleSummary>, std::vector<std::string>);

  Study(std::vector<SampleSummary> groups, std::vector<std::string> labels);

  std::vector<SampleSummary> groups_;
  std::vector<std::string> labels_;
  std::int64_t total_n_ = 0;
};

/// Builds a Study from unvalidated moments; per-group failures are rethrown
/// with the group index and label attached.
Study validate_study(std::span<const GroupMoments> groups);

/// Builds a Study from already-valid summaries. Missing labels default to
/// "1", "2", ... in input order.
Study validate_study(std::vector<SampleSummary> groups, std::vector<std::string> labels = {});

/// theta = (phi, sigma_1, ..., sigma_k) for the likelihood machinery.
class ParameterVector {
 public:
  /// Throws NonPositiveSigma or InvalidArgument (phi zero or non-finite).
  ParameterVector(double phi, std::vector<double> sigmas);

  double phi() const noexcept { return phi_; }
  double eta() const noexcept { return 1.0 / phi_; }
  const std::vector<double>& sigmas() const noexcept { return sigmas_; }
  double sigma(std::size_t i) const { return sigmas_.at(i); }
  std::size_t k() const noexcept { return sigmas_.size(); }

  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;

 private:
  double phi_;
  std::vector<double> sigmas_;
};

enum class Method { Tian, VerrillJohnson, New, Combined };
enum class Alternative { Greater, TwoSided, Less };

std::string_view to_string(Method m) noexcept;
std::string_view to_string(Alternative a) noexcept;
/// Accepts the CLI spellings: tian, vj, new, combined.
std::optional<Method> parse_method(std::string_view s) noexcept;
/// Accepts greater, less, two-sided.
std::optional<Alternative> parse_alternative(std::string_view s) noexcept;

struct IntervalResult {
  Method method = Method::Tian;
  double level = 0.95;
  double lower = 0.0;
  double upper = 0.0;
  double length = 0.0;  // always upper - lower
  std::int64_t draws = 0;
  std::optional<std::uint64_t> seed;  // absent for the asymptotic (vj) interval
};

struct TestResult {
  Method method = Method::Tian;
  double phi0 = 0.0;
  Alternative alternative = Alternative::TwoSided;
  double p_value = 1.0;
  std::int64_t draws = 0;
  std::uint64_t seed = 0;
};

}  // namespace commoncv
