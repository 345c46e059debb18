#include "commoncv/gpq.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <omp.h>

#include "commoncv/error.hpp"
#include "pivotal_kernel.hpp"

namespace commoncv {

namespace {

void check_draw_count(std::int64_t m) {
  if (m < kMinDraws) {
    throw Error(ErrorCode::InvalidArgument,
                "at least " + std::to_string(kMinDraws) + " draws are required, got " +
                    std::to_string(m));
  }
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "level must lie in (0, 1)");
  }
}

void check_gpq_method(Method method) {
  if (method == Method::VerrillJohnson) {
    throw Error(ErrorCode::InvalidArgument, "vj is not a pivotal-quantity method");
  }
}

void check_lengths(std::size_t k, std::size_t u, std::size_t z) {
  if (u != k || z != k) {
    throw Error(ErrorCode::InvalidArgument, "draw vectors must have one entry per group");
  }
}

[[noreturn]] void throw_degenerate_rate(std::int64_t rejected, std::int64_t m) {
  throw Error(ErrorCode::DegenerateRate,
              std::to_string(rejected) + " degenerate replicates out of " +
                  std::to_string(m + rejected) +
                  " attempts; mean/sd ratios are too close to zero or not representable");
}

PivotalDrawSet make_set(std::int64_t m, std::uint64_t seed) {
  PivotalDrawSet set;
  set.tian.resize(static_cast<std::size_t>(m));
  set.fresh.resize(static_cast<std::size_t>(m));
  set.combined.resize(static_cast<std::size_t>(m));
  set.seed = seed;
  return set;
}

// Fills replicate r; returns the number of rejected attempts, or -1 when
// every attempt was degenerate.
int fill_replicate(const detail::PivotalKernel& kernel, std::uint64_t seed, std::int64_t r,
                   std::vector<double>& u, std::vector<double>& z, PivotalDrawSet& set) {
  const auto idx = static_cast<std::size_t>(r);
  for (int attempt = 0; attempt < detail::kMaxAttempts; ++attempt) {
    SeededStream stream(seed, detail::replicate_stream_id(r, attempt));
    double t1 = 0.0;
    double t2 = 0.0;
    if (kernel.evaluate(stream, u, z, t1, t2)) {
      set.tian[idx] = t1;
      set.fresh[idx] = t2;
      set.combined[idx] = t3_draw(t1, t2);
      return attempt;
    }
  }
  return -1;
}

void check_rejections(std::int64_t rejected, bool exhausted, std::int64_t m) {
  if (exhausted ||
      static_cast<double>(rejected) > detail::kMaxRejectedFraction * static_cast<double>(m + rejected)) {
    throw_degenerate_rate(rejected, m);
  }
}

}  // namespace

PivotalDraws PivotalDrawSet::extract(Method method) const {
  check_gpq_method(method);
  PivotalDraws out;
  out.method = method;
  out.seed = seed;
  out.rejected = rejected;
  switch (method) {
    case Method::Tian: out.values = tian; break;
    case Method::New: out.values = fresh; break;
    default: out.values = combined; break;
  }
  return out;
}

double pivotal_sigma_draw(const SampleSummary& summary, double u) {
  if (!(u > 0.0)) throw Error(ErrorCode::NonPositiveChiSquare, "chi-square draw must be positive");
  return static_cast<double>(summary.n() - 1) * summary.variance() / u;
}

double t1_draw(std::span<const SampleSummary> groups, std::span<const double> u,
               std::span<const double> z) {
  check_lengths(groups.size(), u.size(), z.size());
  double sum = 0.0;
  double df_total = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!(u[i] > 0.0)) throw Error(ErrorCode::NonPositiveChiSquare, "chi-square draw must be positive", i);
    const double n = static_cast<double>(groups[i].n());
    const double df = n - 1.0;
    const double d = groups[i].inverse_cv() * std::sqrt(u[i] / df) - z[i] / std::sqrt(n);
    if (d == 0.0 || !std::isfinite(d)) {
      throw Error(ErrorCode::DegenerateDenominator, "T1 denominator vanished", i);
    }
    sum += df / d;
    df_total += df;
  }
  return sum / df_total;
}

double t1_draw(const Study& study, std::span<const double> u, std::span<const double> z) {
  return t1_draw(std::span<const SampleSummary>(study.groups()), u, z);
}

double t2_draw(std::span<const SampleSummary> groups, std::span<const double> u, double z_common) {
  check_lengths(groups.size(), u.size(), groups.size());
  double denom = 0.0;
  double n_total = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!(u[i] > 0.0)) throw Error(ErrorCode::NonPositiveChiSquare, "chi-square draw must be positive", i);
    const double n = static_cast<double>(groups[i].n());
    denom += n * std::sqrt(u[i]) / std::sqrt(n - 1.0) * groups[i].inverse_cv();
    n_total += n;
  }
  denom -= std::sqrt(n_total) * z_common;
  if (denom == 0.0 || !std::isfinite(denom)) {
    throw Error(ErrorCode::DegenerateDenominator, "T2 denominator vanished");
  }
  return n_total / denom;
}

double t2_draw(const Study& study, std::span<const double> u, double z_common) {
  return t2_draw(std::span<const SampleSummary>(study.groups()), u, z_common);
}

PivotalDrawSet generate_all_draws(const Study& study, std::int64_t m, std::uint64_t seed) {
  check_draw_count(m);
  const detail::PivotalKernel kernel(study);
  PivotalDrawSet set = make_set(m, seed);
  std::int64_t rejected = 0;
  int exhausted = 0;

#pragma omp parallel reduction(+ : rejected) reduction(max : exhausted)
  {
    std::vector<double> u(kernel.k());
    std::vector<double> z(kernel.k());
#pragma omp for schedule(static)
    for (std::int64_t r = 0; r < m; ++r) {
      const int attempts = fill_replicate(kernel, seed, r, u, z, set);
      if (attempts < 0) {
        exhausted = 1;
        rejected += detail::kMaxAttempts;
      } else {
        rejected += attempts;
      }
    }
  }
  check_rejections(rejected, exhausted != 0, m);
  set.rejected = rejected;
  return set;
}

PivotalDrawSet generate_all_draws_serial(const Study& study, std::int64_t m, std::uint64_t seed) {
  check_draw_count(m);
  const detail::PivotalKernel kernel(study);
  PivotalDrawSet set = make_set(m, seed);
  std::vector<double> u(kernel.k());
  std::vector<double> z(kernel.k());
  std::int64_t rejected = 0;
  bool exhausted = false;
  for (std::int64_t r = 0; r < m; ++r) {
    const int attempts = fill_replicate(kernel, seed, r, u, z, set);
    if (attempts < 0) {
      exhausted = true;
      break;
    }
    rejected += attempts;
  }
  check_rejections(rejected, exhausted, m);
  set.rejected = rejected;
  return set;
}

PivotalDraws generate_draws(const Study& study, Method method, std::int64_t m,
                            std::uint64_t seed) {
  check_gpq_method(method);
  return generate_all_draws(study, m, seed).extract(method);
}

double quantile(std::span<const double> values, double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile p must lie in (0, 1)");
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "no draws");
  const auto m = static_cast<std::int64_t>(values.size());
  // ceil(p m), ignoring representation error in p (e.g. 0.025000000000000022 * 1e6).
  auto rank = static_cast<std::int64_t>(std::ceil(p * static_cast<double>(m) * (1.0 - 1e-12)));
  rank = std::clamp<std::int64_t>(rank, 1, m);
  std::vector<double> copy(values.begin(), values.end());
  auto nth = copy.begin() + (rank - 1);
  std::nth_element(copy.begin(), nth, copy.end());
  return *nth;
}

double quantile(const PivotalDraws& draws, double p) { return quantile(draws.values, p); }

IntervalResult interval_from_draws(const PivotalDraws& draws, double level) {
  check_level(level);
  check_gpq_method(draws.method);
  const double tail = 0.5 * (1.0 - level);
  IntervalResult out;
  out.method = draws.method;
  out.level = level;
  out.lower = quantile(draws, tail);
  out.upper = quantile(draws, 1.0 - tail);
  out.length = out.upper - out.lower;
  out.draws = static_cast<std::int64_t>(draws.values.size());
  out.seed = draws.seed;
  return out;
}

TestResult test_from_draws(const PivotalDraws& draws, double phi0, Alternative alternative) {
  check_gpq_method(draws.method);
  if (!std::isfinite(phi0)) throw Error(ErrorCode::InvalidArgument, "null value must be finite");
  if (draws.values.empty()) throw Error(ErrorCode::InvalidArgument, "no draws");
  std::int64_t at_most = 0;
  std::int64_t at_least = 0;
  for (double t : draws.values) {
    if (t <= phi0) ++at_most;
    if (t >= phi0) ++at_least;
  }
  const double m = static_cast<double>(draws.values.size());
  const double p_le = static_cast<double>(at_most) / m;
  const double p_ge = static_cast<double>(at_least) / m;

  TestResult out;
  out.method = draws.method;
  out.phi0 = phi0;
  out.alternative = alternative;
  out.draws = static_cast<std::int64_t>(draws.values.size());
  out.seed = draws.seed;
  switch (alternative) {
    case Alternative::Greater: out.p_value = p_le; break;
    case Alternative::Less: out.p_value = p_ge; break;
    case Alternative::TwoSided: out.p_value = std::min(1.0, 2.0 * std::min(p_le, p_ge)); break;
  }
  return out;
}

IntervalResult gpq_interval(const Study& study, Method method, double level, std::int64_t m,
                            std::uint64_t seed) {
  check_level(level);
  return interval_from_draws(generate_draws(study, method, m, seed), level);
}

TestResult gpq_test(const Study& study, Method method, double phi0, Alternative alternative,
                    std::int64_t m, std::uint64_t seed) {
  return test_from_draws(generate_draws(study, method, m, seed), phi0, alternative);
}

}  // namespace commoncv
