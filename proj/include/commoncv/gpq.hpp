#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "commoncv/model.hpp"

namespace commoncv {

/// Default number of Monte Carlo draws per interval or test.
inline constexpr std::int64_t kDefaultDraws = 5000;
/// Smallest accepted draw count.
inline constexpr std::int64_t kMinDraws = 100;

/// m realizations of one pivotal quantity, in replicate order (unsorted).
struct PivotalDraws {
  Method method = Method::Tian;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::int64_t rejected = 0;  // degenerate replicates that were resampled
};

/// T1, T2 and T3 computed from one shared set of base draws.
struct PivotalDrawSet {
  std::vector<double> tian;
  std::vector<double> fresh;     // T2
  std::vector<double> combined;  // T3 = (T1 + T2) / 2
  std::uint64_t seed = 0;
  std::int64_t rejected = 0;

  PivotalDraws extract(Method method) const;
};

/// Generalized pivotal for sigma_i^2: (n_i - 1) s_i^2 / u.
/// Throws NonPositiveChiSquare for u <= 0.
double pivotal_sigma_draw(const SampleSummary& summary, double u);

/// Per-group pivotal
///   sum_i (n_i - 1) / D_i / sum_i (n_i - 1),
///   D_i = (xbar_i / s_i) sqrt(u_i / (n_i - 1)) - z_i / sqrt(n_i).
/// Throws DegenerateDenominator if some D_i is zero or non-finite.
double t1_draw(std::span<const SampleSummary> groups, std::span<const double> u,
               std::span<const double> z);
double t1_draw(const Study& study, std::span<const double> u, std::span<const double> z);

/// The pivotal built on the known-sigma MLE of 1/phi:
///   n / (sum_i n_i sqrt(u_i) / sqrt(n_i - 1) * (xbar_i / s_i) - sqrt(n) z).
/// Throws DegenerateDenominator if the denominator is zero or non-finite.
double t2_draw(std::span<const SampleSummary> groups, std::span<const double> u, double z_common);
double t2_draw(const Study& study, std::span<const double> u, double z_common);

/// Combined pivotal 0.5 t1 + 0.5 t2.
constexpr double t3_draw(double t1, double t2) noexcept { return 0.5 * t1 + 0.5 * t2; }

/// Monte Carlo draws of all three pivotals. Replicate r consumes, from its
/// own stream, k chi-squares (df n_i - 1), then k normals, then one common
/// normal. Degenerate replicates are redrawn from a fresh sub-stream and
/// counted; more than 1% rejections raises DegenerateRate.
/// Results do not depend on the number of OpenMP threads.
PivotalDrawSet generate_all_draws(const Study& study, std::int64_t m, std::uint64_t seed);

/// Same computation on the calling thread only (used inside already
/// parallel loops).
PivotalDrawSet generate_all_draws_serial(const Study& study, std::int64_t m, std::uint64_t seed);

/// Draws of one pivotal (method must not be VerrillJohnson).
PivotalDraws generate_draws(const Study& study, Method method, std::int64_t m,
                            std::uint64_t seed);

/// Lower empirical quantile: the ceil(p m)-th order statistic (1-based).
double quantile(std::span<const double> values, double p);
double quantile(const PivotalDraws& draws, double p);

/// (quantile(alpha/2), quantile(1 - alpha/2)) of existing draws.
IntervalResult interval_from_draws(const PivotalDraws& draws, double level);

/// Generalized p-value from existing draws: Greater -> #{t <= phi0}/m,
/// Less -> #{t >= phi0}/m, TwoSided -> twice the smaller, capped at 1.
TestResult test_from_draws(const PivotalDraws& draws, double phi0, Alternative alternative);

IntervalResult gpq_interval(const Study& study, Method method, double level, std::int64_t m,
                            std::uint64_t seed);

TestResult gpq_test(const Study& study, Method method, double phi0, Alternative alternative,
                    std::int64_t m, std::uint64_t seed);

namespace reference {

/// Plain serial implementation of generate_all_draws built from the public
/// per-draw operations. Kept for testing the parallel kernel.
PivotalDrawSet generate_all_draws(const Study& study, std::int64_t m, std::uint64_t seed);

}  // namespace reference

}  // namespace commoncv
