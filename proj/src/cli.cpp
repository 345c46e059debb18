#include "commoncv/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <omp.h>

#include "commoncv/datasets.hpp"
#include "commoncv/error.hpp"
#include "commoncv/estimators.hpp"
#include "commoncv/gpq.hpp"
#include "commoncv/io.hpp"
#include "commoncv/simharness.hpp"

namespace commoncv {

namespace {

using nlohmann::json;

const std::vector<std::string> kMethodChoices = {"tian", "vj", "new", "combined", "all"};

CLI::Validator open_unit_interval() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        double v = 0.0;
        if (!parse_decimal(s, v) || !(v > 0.0 && v < 1.0)) {
          return "must be a number strictly between 0 and 1, got " + s;
        }
        return {};
      },
      "(0,1)");
}

CLI::Validator finite_number() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        double v = 0.0;
        return parse_decimal(s, v) ? std::string() : "must be a finite number, got " + s;
      },
      "NUMBER");
}

std::vector<Method> expand_methods(const std::string& choice, bool allow_vj) {
  if (choice == "all") {
    if (allow_vj) return {Method::Tian, Method::VerrillJohnson, Method::New, Method::Combined};
    return {Method::Tian, Method::New, Method::Combined};
  }
  const auto m = parse_method(choice);
  if (!m) throw Error(ErrorCode::InvalidArgument, "--method: unknown method " + choice);
  if (!allow_vj && *m == Method::VerrillJohnson) {
    throw Error(ErrorCode::InvalidArgument, "--method: vj has no generalized p-value; use tian, new or combined");
  }
  return {*m};
}

std::string fixed(double x, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

struct StudyOptions {
  std::string input;
  bool summary = false;
};

Study load_study(const StudyOptions& opts) {
  return opts.summary ? read_summary_csv(std::filesystem::path(opts.input))
                      : read_raw_csv(std::filesystem::path(opts.input));
}

json interval_json(const IntervalResult& r) {
  json j = {{"kind", "interval"},     {"method", to_string(r.method)}, {"level", r.level},
            {"lower", r.lower},       {"upper", r.upper},              {"length", r.length},
            {"draws", r.draws}};
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  return j;
}

json test_json(const TestResult& r) {
  return {{"kind", "test"},       {"method", to_string(r.method)},
          {"null", r.phi0},       {"alternative", to_string(r.alternative)},
          {"p_value", r.p_value}, {"draws", r.draws},
          {"seed", r.seed}};
}

void print_intervals(std::ostream& out, const std::vector<IntervalResult>& results, bool as_json) {
  if (as_json) {
    for (const auto& r : results) out << interval_json(r).dump() << '\n';
    return;
  }
  out << std::left << std::setw(10) << "method" << std::setw(8) << "level" << std::right
      << std::setw(12) << "lower" << std::setw(12) << "upper" << std::setw(12) << "length"
      << std::setw(10) << "draws" << std::setw(22) << "seed" << '\n';
  for (const auto& r : results) {
    out << std::left << std::setw(10) << to_string(r.method) << std::setw(8) << r.level
        << std::right << std::setw(12) << fixed(r.lower) << std::setw(12) << fixed(r.upper)
        << std::setw(12) << fixed(r.length) << std::setw(10) << r.draws << std::setw(22)
        << (r.seed ? std::to_string(*r.seed) : std::string("-")) << '\n';
  }
}

void print_tests(std::ostream& out, const std::vector<TestResult>& results, bool as_json) {
  if (as_json) {
    for (const auto& r : results) out << test_json(r).dump() << '\n';
    return;
  }
  out << std::left << std::setw(10) << "method" << std::setw(12) << "null" << std::setw(12)
      << "alternative" << std::right << std::setw(10) << "p_value" << std::setw(10) << "draws"
      << std::setw(22) << "seed" << '\n';
  for (const auto& r : results) {
    out << std::left << std::setw(10) << to_string(r.method) << std::setw(12) << r.phi0
        << std::setw(12) << to_string(r.alternative) << std::right << std::setw(10)
        << fixed(r.p_value, 4) << std::setw(10) << r.draws << std::setw(22) << r.seed << '\n';
  }
}

std::vector<IntervalResult> compute_intervals(const Study& study, const std::vector<Method>& methods,
                                              double level, std::int64_t draws,
                                              std::uint64_t seed) {
  std::optional<PivotalDrawSet> set;
  std::vector<IntervalResult> results;
  for (Method m : methods) {
    if (m == Method::VerrillJohnson) {
      results.push_back(vj_interval(study, level));
      continue;
    }
    if (!set) set = generate_all_draws(study, draws, seed);
    results.push_back(interval_from_draws(set->extract(m), level));
  }
  return results;
}

json estimates_json(const Study& study) {
  json groups = json::array();
  for (std::size_t i = 0; i < study.k(); ++i) {
    const auto& g = study.group(i);
    groups.push_back({{"group", study.label(i)},
                      {"n", g.n()},
                      {"mean", g.mean()},
                      {"sd", g.sd()},
                      {"variance", g.variance()},
                      {"cv", g.cv()}});
  }
  return {{"kind", "estimate"},
          {"groups", groups},
          {"feltz_miller", feltz_miller_estimate(study)},
          {"new", new_estimate(study)},
          {"mle", newton_mle(study).phi()}};
}

void print_estimates(std::ostream& out, const Study& study, bool as_json) {
  const json j = estimates_json(study);
  if (as_json) {
    out << j.dump() << '\n';
    return;
  }
  out << std::left << std::setw(12) << "group" << std::right << std::setw(6) << "n"
      << std::setw(14) << "mean" << std::setw(14) << "variance" << std::setw(10) << "cv" << '\n';
  for (std::size_t i = 0; i < study.k(); ++i) {
    const auto& g = study.group(i);
    out << std::left << std::setw(12) << study.label(i) << std::right << std::setw(6) << g.n()
        << std::setw(14) << fixed(g.mean(), 4) << std::setw(14) << fixed(g.variance(), 4)
        << std::setw(10) << fixed(g.cv(), 4) << '\n';
  }
  out << "feltz_miller  " << fixed(j["feltz_miller"].get<double>()) << '\n'
      << "new           " << fixed(j["new"].get<double>()) << '\n'
      << "mle           " << fixed(j["mle"].get<double>()) << '\n';
}

void add_study_options(CLI::App* sub, StudyOptions& opts) {
  sub->add_option("--input,-i", opts.input, "CSV file (group,value or group,n,mean,sd)")->required();
  sub->add_flag("--summary", opts.summary, "Input holds per-group summaries");
}

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::Validation: return kExitValidation;
    case ErrorCategory::Numerical: return kExitNumerical;
    case ErrorCategory::Io: return kExitIo;
  }
  return kExitNumerical;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inference on the common coefficient of variation of k normal populations",
               "commoncv"};
  app.require_subcommand(1);

  bool as_json = false;
  app.add_flag("--json", as_json, "One JSON object per result on standard output");

  StudyOptions study_opts;
  std::string method = "all";
  double level = 0.95;
  // Each subcommand owns its storage: default_val assigns at definition time.
  struct McOptions {
    std::int64_t draws = kDefaultDraws;
    std::uint64_t seed = 0;
    int threads = 0;
  };
  McOptions ci_mc, test_mc, sim_mc, examples_mc;

  auto add_mc_options = [](CLI::App* sub, McOptions& mc, std::int64_t default_draws) {
    sub->add_option("--draws,-m", mc.draws, "Monte Carlo draws")
        ->default_val(default_draws)
        ->check(CLI::Range(kMinDraws, std::numeric_limits<std::int64_t>::max()));
    sub->add_option("--seed", mc.seed, "Master seed (env COMMON_CV_SEED)")
        ->default_val(0)
        ->envname("COMMON_CV_SEED");
    sub->add_option("--threads", mc.threads, "OpenMP threads (default: runtime choice)")
        ->check(CLI::NonNegativeNumber);
  };

  auto* estimate = app.add_subcommand("estimate", "Group CVs and point estimates of the common CV");
  add_study_options(estimate, study_opts);
  estimate->add_flag("--json", as_json, "JSON output");

  auto* ci = app.add_subcommand("ci", "Confidence intervals for the common CV");
  add_study_options(ci, study_opts);
  ci->add_option("--method", method, "tian|vj|new|combined|all")
      ->default_val("all")
      ->check(CLI::IsMember(kMethodChoices));
  ci->add_option("--level", level, "Confidence level")->default_val(0.95)->check(open_unit_interval());
  add_mc_options(ci, ci_mc, kDefaultDraws);
  ci->add_flag("--json", as_json, "JSON output");

  double null_value = 0.0;
  std::string alternative = "two-sided";
  auto* test = app.add_subcommand("test", "Generalized p-values for H0 about the common CV");
  add_study_options(test, study_opts);
  test->add_option("--method", method, "tian|new|combined|all")
      ->default_val("all")
      ->check(CLI::IsMember(kMethodChoices));
  test->add_option("--null", null_value, "Null value phi0")->required()->check(finite_number());
  test->add_option("--alternative", alternative, "greater|less|two-sided")
      ->default_val("two-sided")
      ->check(CLI::IsMember({"greater", "less", "two-sided"}));
  add_mc_options(test, test_mc, kDefaultDraws);
  test->add_flag("--json", as_json, "JSON output");

  std::string config_path;
  std::string out_path;
  bool full = false;
  std::int64_t reps = kDeskReps;
  auto* simulate = app.add_subcommand("simulate", "Coverage and average length study");
  auto* config_opt = simulate->add_option("--config", config_path, "Grid CSV: phi,mu1..muk,n1..nk");
  simulate->add_flag("--full-grid", full, "Use the built-in 72-cell grid")->excludes(config_opt);
  simulate->add_option("--reps", reps, "Replications per cell")
      ->default_val(kDeskReps)
      ->check(CLI::PositiveNumber);
  simulate->add_option("--method", method, "tian|vj|new|combined|all")
      ->default_val("all")
      ->check(CLI::IsMember(kMethodChoices));
  simulate->add_option("--level", level, "Confidence level")->default_val(0.95)->check(open_unit_interval());
  simulate->add_option("--out,-o", out_path, "Results CSV (default: standard output)");
  add_mc_options(simulate, sim_mc, kDeskDraws);

  auto* examples = app.add_subcommand("examples", "Run the two bundled examples");
  add_mc_options(examples, examples_mc, kDefaultDraws);
  examples->add_flag("--json", as_json, "JSON output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  const McOptions& mc = ci->parsed()         ? ci_mc
                        : test->parsed()     ? test_mc
                        : simulate->parsed() ? sim_mc
                                             : examples_mc;
  const std::int64_t draws = mc.draws;
  const std::uint64_t seed = mc.seed;

  try {
    set_threads(mc.threads);
    if (estimate->parsed()) {
      print_estimates(out, load_study(study_opts), as_json);
    } else if (ci->parsed()) {
      const Study study = load_study(study_opts);
      print_intervals(out, compute_intervals(study, expand_methods(method, true), level, draws, seed),
                      as_json);
    } else if (test->parsed()) {
      const auto methods = expand_methods(method, false);
      const Study study = load_study(study_opts);
      const auto alt = *parse_alternative(alternative);
      const auto set = generate_all_draws(study, draws, seed);
      std::vector<TestResult> results;
      for (Method m : methods) results.push_back(test_from_draws(set.extract(m), null_value, alt));
      print_tests(out, results, as_json);
    } else if (simulate->parsed()) {
      SimConfig defaults;
      defaults.reps = reps;
      defaults.m = draws;
      defaults.level = level;
      defaults.master_seed = seed;
      defaults.methods = expand_methods(method, true);
      std::vector<SimConfig> configs;
      if (full) {
        configs = full_grid(reps, draws, seed);
        for (auto& c : configs) {
          c.level = level;
          c.methods = defaults.methods;
        }
      } else if (!config_path.empty()) {
        configs = read_grid_csv(std::filesystem::path(config_path), defaults);
      } else {
        throw Error(ErrorCode::InvalidArgument, "simulate: one of --config or --full-grid is required");
      }
      const auto rows = run_grid(configs);
      if (out_path.empty()) {
        write_sim_results_csv(out, rows);
      } else {
        std::ofstream file(out_path);
        if (!file) throw Error(ErrorCode::IoError, "cannot write " + out_path);
        write_sim_results_csv(file, rows);
        if (!file) throw Error(ErrorCode::IoError, "write failed for " + out_path);
        out << "wrote " << rows.size() << " cells to " << out_path << '\n';
      }
    } else if (examples->parsed()) {
      const std::vector<std::pair<std::string, Study>> studies = {
          {"MCV surveys 1995 and 1996 (summaries)", datasets::mcv_surveys()},
          {"survival times, four hospitals (raw data)", datasets::hospitals()}};
      const std::vector<Method> all = {Method::Tian, Method::VerrillJohnson, Method::New,
                                       Method::Combined};
      for (const auto& [title, study] : studies) {
        const auto intervals = compute_intervals(study, all, 0.95, draws, seed);
        if (as_json) {
          json j = estimates_json(study);
          j["example"] = title;
          out << j.dump() << '\n';
          print_intervals(out, intervals, true);
        } else {
          out << title << '\n';
          print_estimates(out, study, false);
          out << "95% intervals\n";
          print_intervals(out, intervals, false);
          out << '\n';
        }
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace commoncv
