#include "commoncv/simharness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <omp.h>

#include "commoncv/error.hpp"
#include "commoncv/estimators.hpp"
#include "commoncv/gpq.hpp"
#include "commoncv/randgen.hpp"

namespace commoncv {

namespace {

struct Outcome {
  bool ok = false;
  bool covered = false;
  double length = 0.0;
};

// outcomes[j] belongs to config.methods[j]
using ReplicateOutcome = std::vector<Outcome>;

ReplicateOutcome run_replicate(const SimConfig& config, std::uint64_t seed, std::int64_t r) {
  ReplicateOutcome out(config.methods.size());

  SeededStream stream(seed, derive_stream_id(static_cast<std::uint64_t>(r), kRoleSimData));
  std::vector<SampleSummary> groups;
  groups.reserve(config.mus.size());
  std::vector<double> x;
  try {
    for (std::size_t i = 0; i < config.mus.size(); ++i) {
      const double mu = config.mus[i];
      const double sigma = config.phi * mu;
      x.resize(static_cast<std::size_t>(config.ns[i]));
      for (auto& v : x) v = mu + sigma * standard_normal(stream);
      groups.push_back(summarize(x));
    }
  } catch (const Error&) {
    return out;
  }
  const Study study = validate_study(std::move(groups));

  const bool wants_gpq = std::any_of(config.methods.begin(), config.methods.end(),
                                     [](Method m) { return m != Method::VerrillJohnson; });
  std::optional<PivotalDrawSet> draws;
  if (wants_gpq) {
    const std::uint64_t pivotal_seed =
        combine_keys(seed, derive_stream_id(static_cast<std::uint64_t>(r), kRoleSimPivotalSeed));
    try {
      draws = generate_all_draws_serial(study, config.m, pivotal_seed);
    } catch (const Error&) {
      draws.reset();
    }
  }

  for (std::size_t j = 0; j < config.methods.size(); ++j) {
    const Method method = config.methods[j];
    std::optional<IntervalResult> ci;
    try {
      if (method == Method::VerrillJohnson) {
        ci = vj_interval(study, config.level);
      } else if (draws) {
        ci = interval_from_draws(draws->extract(method), config.level);
      }
    } catch (const Error&) {
      ci.reset();
    }
    if (ci) {
      out[j].ok = true;
      out[j].covered = ci->lower <= config.phi && config.phi <= ci->upper;
      out[j].length = ci->length;
    }
  }
  return out;
}

SimResult aggregate(const SimConfig& config, const std::vector<ReplicateOutcome>& outcomes) {
  SimResult result;
  result.config = config;
  for (std::size_t j = 0; j < config.methods.size(); ++j) {
    MethodCoverage mc;
    mc.method = config.methods[j];
    double length_sum = 0.0;
    std::int64_t completed = 0;
    for (const auto& rep : outcomes) {
      const Outcome& o = rep[j];
      if (!o.ok) {
        ++mc.failures;
        continue;
      }
      ++completed;
      if (o.covered) ++mc.covered;
      length_sum += o.length;
    }
    if (completed > 0) {
      mc.coverage = static_cast<double>(mc.covered) / static_cast<double>(completed);
      mc.avg_length = length_sum / static_cast<double>(completed);
    } else {
      mc.coverage = std::nan("");
      mc.avg_length = std::nan("");
    }
    result.methods.push_back(mc);
  }
  return result;
}

}  // namespace

const MethodCoverage* SimResult::find(Method method) const {
  for (const auto& m : methods) {
    if (m.method == method) return &m;
  }
  return nullptr;
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::uint64_t cell_index) noexcept {
  return combine_keys(master_seed, derive_stream_id(cell_index, kRoleSimCell));
}

void validate_config(const SimConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (c.mus.size() != c.ns.size()) fail("mus and ns must have the same length");
  if (c.mus.size() < 2) fail("at least 2 groups are required");
  if (!(c.phi > 0.0) || !std::isfinite(c.phi)) fail("phi must be positive");
  if (c.reps < 1) fail("reps must be >= 1");
  if (c.m < kMinDraws) fail("draws must be >= " + std::to_string(kMinDraws));
  if (!(c.level > 0.0 && c.level < 1.0)) fail("level must lie in (0, 1)");
  if (c.methods.empty()) fail("no methods requested");
  for (double mu : c.mus) {
    if (!std::isfinite(mu) || mu == 0.0) fail("group means must be finite and nonzero");
  }
  for (auto n : c.ns) {
    if (n < 2) fail("group sizes must be >= 2");
  }
}

SimResult run_study(const SimConfig& config) {
  validate_config(config);
  const std::uint64_t seed = cell_seed(config.master_seed, config.cell_index);
  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(config.reps));
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t r = 0; r < config.reps; ++r) {
    outcomes[static_cast<std::size_t>(r)] = run_replicate(config, seed, r);
  }
  return aggregate(config, outcomes);
}

SimResult run_study_serial(const SimConfig& config) {
  validate_config(config);
  const std::uint64_t seed = cell_seed(config.master_seed, config.cell_index);
  std::vector<ReplicateOutcome> outcomes;
  outcomes.reserve(static_cast<std::size_t>(config.reps));
  for (std::int64_t r = 0; r < config.reps; ++r) outcomes.push_back(run_replicate(config, seed, r));
  return aggregate(config, outcomes);
}

std::vector<SimResult> run_grid(const std::vector<SimConfig>& configs) {
  std::vector<SimResult> rows;
  rows.reserve(configs.size());
  for (const auto& c : configs) rows.push_back(run_study(c));
  return rows;
}

std::vector<SimConfig> full_grid(std::int64_t reps, std::int64_t m, std::uint64_t master_seed) {
  static const double phis[] = {0.05, 0.3, 0.5};
  static const std::vector<std::vector<double>> mean_patterns = {{1, 1, 1}, {1, 1, 2}, {1, 5, 10}};
  static const std::vector<std::vector<std::int64_t>> size_patterns = {
      {5, 5, 5},    {5, 5, 10},   {5, 10, 30},  {10, 10, 10},
      {10, 20, 20}, {10, 20, 30}, {20, 20, 30}, {30, 30, 30}};
  std::vector<SimConfig> grid;
  std::uint64_t index = 0;
  for (double phi : phis) {
    for (const auto& mus : mean_patterns) {
      for (const auto& ns : size_patterns) {
        SimConfig c;
        c.phi = phi;
        c.mus = mus;
        c.ns = ns;
        c.reps = reps;
        c.m = m;
        c.master_seed = master_seed;
        c.cell_index = index++;
        grid.push_back(std::move(c));
      }
    }
  }
  return grid;
}

}  // namespace commoncv
