#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "commoncv/model.hpp"

namespace commoncv {

inline constexpr std::int64_t kDeskReps = 2000;
inline constexpr std::int64_t kDeskDraws = 2000;

/// One cell of a coverage study: k normal groups with means mu_i and
/// standard deviations phi * mu_i.
struct SimConfig {
  double phi = 0.05;
  std::vector<double> mus;
  std::vector<std::int64_t> ns;
  std::int64_t reps = kDeskReps;
  std::int64_t m = kDeskDraws;
  double level = 0.95;
  std::vector<Method> methods{Method::Tian, Method::VerrillJohnson, Method::New, Method::Combined};
  std::uint64_t master_seed = 0;
  // Position of the cell in its grid; part of the seed derivation.
  std::uint64_t cell_index = 0;
};

/// Throws Error(InvalidArgument) describing the first violated constraint.
void validate_config(const SimConfig& config);

struct MethodCoverage {
  Method method = Method::Tian;
  double coverage = 0.0;    // covered / (reps - failures)
  double avg_length = 0.0;  // over non-failed replications
  std::int64_t covered = 0;
  std::int64_t failures = 0;  // replications where the method raised an error
};

struct SimResult {
  SimConfig config;
  std::vector<MethodCoverage> methods;  // in config.methods order

  const MethodCoverage* find(Method method) const;
};

/// Runs reps replications of one cell. Replication r draws its data from
/// stream (cell seed, r) and its pivotal draws from a seed derived from
/// (cell seed, r), so every replication is reproducible on its own.
/// Per-method errors are counted as failures and never abort the study.
/// Replications run in parallel; results do not depend on the thread count.
SimResult run_study(const SimConfig& config);

/// Same computation as run_study on the calling thread only.
SimResult run_study_serial(const SimConfig& config);

/// One SimResult per config, in input order.
std::vector<SimResult> run_grid(const std::vector<SimConfig>& configs);

/// The full 3 x 3 x 8 design: phi in {0.05, 0.3, 0.5}, mean patterns
/// (1,1,1), (1,1,2), (1,5,10), and eight sample-size patterns. Cells are
/// numbered in that nesting order.
std::vector<SimConfig> full_grid(std::int64_t reps = kDeskReps, std::int64_t m = kDeskDraws,
                                  std::uint64_t master_seed = 0);

/// Seed used for the cell with the given index.
std::uint64_t cell_seed(std::uint64_t master_seed, std::uint64_t cell_index) noexcept;

}  // namespace commoncv
