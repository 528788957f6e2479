#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xlearn/baselines.hpp"
#include "xlearn/env.hpp"
#include "xlearn/schedule.hpp"

namespace xlearn {

// Raised for invalid configurations (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised for filesystem trouble (CLI exit code 3).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class AlgoKind { kCrossLearn, kPerContextExp3Ix, kKnownNuCross, kUniform };

AlgoKind parse_algo_kind(const std::string& name);
std::string algo_kind_name(AlgoKind kind);

struct RunConfig {
  EnvSpec env;                      // env.T is overridden per sweep entry
  AlgoKind algo = AlgoKind::kCrossLearn;
  std::vector<std::int64_t> horizons;  // T list
  double delta = 0.1;
  // When set, the learner's schedule uses this concentration weight instead
  // of the published 2 ln(8KT/delta); config-file key "schedule_iota".
  std::optional<double> schedule_iota;
  std::uint64_t seed_base = 0;
  int n_seeds = 1;
  std::int64_t thin = 1;
  bool emit_decomposition = false;
  std::string out_dir;
  int jobs = 1;

  ParamSchedule schedule_for(std::int64_t T) const;
  void validate() const;  // throws ConfigError
};

// Result of one (T, seed) run, kept for the sweep summary.
struct RunStats {
  std::int64_t T = 0;
  int seed_index = 0;
  double final_regret = 0.0;
};

// Runs the sweep and writes, for each (T, seed), traj_T{T}_s{seed}.csv and
// run_T{T}_s{seed}.json, plus one sweep-level summary.json. Seeds run
// independently (worker pool of config.jobs threads); files are written in
// deterministic (T, seed) order regardless of scheduling, and repeated
// invocations produce byte-identical output.
std::vector<RunStats> run_sweep(const RunConfig& config);

// Least-squares slope of log(y) against log(x). Throws ConfigError on fewer
// than two points or non-positive data.
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

// One-sided sign test: probability of at least `wins` successes in n fair
// coin flips.
double sign_test_pvalue(int wins, int n);

struct ScalingReport {
  double slope = 0.0;
  std::vector<std::int64_t> horizons;
  std::vector<double> median;
  std::vector<double> p95;
  // Optional baseline comparison, keyed by the baseline sweep's algo name.
  std::map<std::string, std::vector<double>> baseline_median;
};

// Reads summary.json files from a primary sweep directory plus optional
// baseline sweep directories and produces the scaling report (fitted slope,
// 95th/50th percentile ratios, comparison table). Requires at least 3
// distinct T values and at least 20 seeds in the primary sweep.
ScalingReport summarize(const std::filesystem::path& primary_dir,
                        const std::vector<std::filesystem::path>& baseline_dirs,
                        std::string* rendered_table = nullptr);

// Interpolated percentile (linear between closest ranks) of unsorted values.
double percentile(std::vector<double> values, double pct);

}  // namespace xlearn
