#include "xlearn/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "xlearn/algo.hpp"
#include "xlearn/diagnostics.hpp"
#include "xlearn/parallel.hpp"
#include "xlearn/regret.hpp"
#include "xlearn/schedule.hpp"

namespace xlearn {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "0";
  return std::string(buf, ptr);
}

json env_to_json(const EnvSpec& env) {
  json j;
  j["kind"] = env_kind_name(env.kind);
  j["K"] = env.K;
  j["C"] = env.C;
  j["env_seed"] = env.env_seed;
  if (env.kind == EnvKind::kShifting) {
    j["segments"] = env.segments;
    j["jitter"] = env.jitter;
  }
  if (env.kind == EnvKind::kAuction) {
    j["value_grid"] = env.value_grid;
    j["bid_grid"] = env.bid_grid;
  }
  if (env.kind == EnvKind::kSleeping) j["availability"] = env.availability;
  if (env.nu_override) j["nu"] = *env.nu_override;
  return j;
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["env"] = env_to_json(cfg.env);
  j["algo"] = algo_kind_name(cfg.algo);
  j["T"] = cfg.horizons;
  j["delta"] = cfg.delta;
  if (cfg.schedule_iota) j["schedule_iota"] = *cfg.schedule_iota;
  j["seed_base"] = cfg.seed_base;
  j["n_seeds"] = cfg.n_seeds;
  j["thin"] = cfg.thin;
  j["emit_decomposition"] = cfg.emit_decomposition;
  return j;
}

struct RunArtifacts {
  std::string traj_csv;
  std::string run_json;
  double final_regret = 0.0;
};

RunArtifacts execute_run(const RunConfig& cfg, std::int64_t T, int seed_idx) {
  const std::uint64_t master = cfg.seed_base + static_cast<std::uint64_t>(seed_idx);
  RngStreams rngs(master);

  EnvSpec spec = cfg.env;
  spec.T = T;
  spec.env_seed = cfg.env.env_seed + master;  // one adversary per seed, shared across algos
  auto [oracle, nu] = build_oracle(spec);

  Trace trace;
  if (cfg.algo == AlgoKind::kCrossLearn) {
    trace = run_episode(*oracle, nu, cfg.schedule_for(T), rngs);
  } else {
    BaselineKind bk = BaselineKind::kUniform;
    if (cfg.algo == AlgoKind::kPerContextExp3Ix) bk = BaselineKind::kPerContextExp3Ix;
    if (cfg.algo == AlgoKind::kKnownNuCross) bk = BaselineKind::kKnownNuCross;
    trace = run_baseline(bk, *oracle, nu, rngs);
  }

  std::vector<int> contexts;
  contexts.reserve(trace.rounds.size());
  for (const RoundRecord& r : trace.rounds) contexts.push_back(r.context);
  const Policy pi = best_fixed_policy(*oracle, contexts);

  RunArtifacts out;
  std::ostringstream csv;
  csv << "t,cum_regret\n";
  double cum = 0.0;
  for (const RoundRecord& r : trace.rounds) {
    cum += oracle->loss(r.t, r.context, r.arm) - oracle->loss(r.t, r.context, pi[r.context]);
    if (r.t % cfg.thin == 0 || r.t == trace.T)
      csv << r.t << "," << format_double(cum) << "\n";
  }
  out.traj_csv = csv.str();
  out.final_regret = cum;

  json rep;
  rep["algo"] = algo_kind_name(cfg.algo);
  rep["T"] = T;
  rep["seed"] = seed_idx;
  rep["master_seed"] = master;
  rep["rng"] = std::string(RngStreams::algorithm_name());
  rep["env"] = env_to_json(spec);
  rep["final_regret"] = out.final_regret;
  rep["policy"] = pi.arm_for_context;

  if (cfg.algo == AlgoKind::kCrossLearn) {
    const ParamSchedule& s = *trace.schedule;
    rep["schedule"] = {{"iota", s.iota}, {"L", s.L}, {"gamma", s.gamma},
                       {"eta", s.eta},   {"delta", s.delta}};
    const ReplayReport diag = replay_diagnostics(trace, *oracle, nu, pi);
    json epochs = json::array();
    for (std::size_t i = 0; i < diag.epochs.size(); ++i) {
      const EpochEvents& ev = diag.epochs[i];
      double fhat_sum = 0.0;
      for (double v : trace.epochs[i].fhat) fhat_sum += v;
      epochs.push_back({{"e", ev.e},
                        {"completed", ev.completed},
                        {"F", ev.F},
                        {"L", ev.L},
                        {"fallbacks", ev.fallbacks},
                        {"max_ratio", ev.max_ratio},
                        {"min_ratio", ev.min_ratio},
                        {"j_violations", ev.j_violations},
                        {"l_violations", ev.l_violations},
                        {"max_tilde_sum", ev.max_tilde_sum},
                        {"fhat_sum", fhat_sum}});
    }
    rep["epochs"] = std::move(epochs);
    rep["G"] = diag.G;
    rep["fallbacks_after_epoch1"] = diag.fallbacks_after_epoch1;
    rep["p_band_violations"] = diag.p_band_violations;
    rep["ptilde_band_violations"] = diag.ptilde_band_violations;
    if (cfg.emit_decomposition) {
      const DecompositionLedger& led = diag.ledger;
      rep["decomposition"] = {{"bias1", led.bias1}, {"bias2", led.bias2}, {"ftrl", led.ftrl},
                              {"bias3", led.bias3}, {"bias4", led.bias4}, {"bias5", led.bias5},
                              {"sum", led.sum()},   {"regret", led.regret},
                              {"pairing_gap", diag.pairing_gap}};
    }
  }
  out.run_json = rep.dump(2) + "\n";
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f << content;
  if (!f) throw IoError("write failed: " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read: " + path.string());
  json j;
  f >> j;
  return j;
}

}  // namespace

AlgoKind parse_algo_kind(const std::string& name) {
  if (name == "crosslearn") return AlgoKind::kCrossLearn;
  if (name == "per_context_exp3ix") return AlgoKind::kPerContextExp3Ix;
  if (name == "known_nu_cross") return AlgoKind::kKnownNuCross;
  if (name == "uniform") return AlgoKind::kUniform;
  throw ConfigError("unknown algorithm: " + name);
}

std::string algo_kind_name(AlgoKind kind) {
  switch (kind) {
    case AlgoKind::kCrossLearn: return "crosslearn";
    case AlgoKind::kPerContextExp3Ix: return "per_context_exp3ix";
    case AlgoKind::kKnownNuCross: return "known_nu_cross";
    case AlgoKind::kUniform: return "uniform";
  }
  return "?";
}

ParamSchedule RunConfig::schedule_for(std::int64_t T) const {
  if (schedule_iota) return schedule_from_iota(env.K, T, *schedule_iota, delta);
  return derive_schedule(env.K, T, delta);
}

void RunConfig::validate() const {
  if (n_seeds < 1) throw ConfigError("need at least one seed");
  if (thin < 1) throw ConfigError("thin must be >= 1");
  if (horizons.empty()) throw ConfigError("need at least one horizon");
  for (std::int64_t T : horizons)
    if (T < 4) throw ConfigError("horizons must be >= 4");
  if (out_dir.empty()) throw ConfigError("output directory not set");
  if (emit_decomposition && algo != AlgoKind::kCrossLearn)
    throw ConfigError("decomposition is only defined for the crosslearn algorithm");
  if (jobs < 0) throw ConfigError("jobs must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0,1)");
  // Surface environment and schedule problems before any run starts.
  EnvSpec probe = env;
  for (std::int64_t T : horizons) {
    probe.T = T;
    try {
      build_oracle(probe);
      if (algo == AlgoKind::kCrossLearn) schedule_for(T);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
}

std::vector<RunStats> run_sweep(const RunConfig& config) {
  config.validate();
  std::filesystem::path dir(config.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir.string());

  struct Task {
    std::int64_t T;
    int seed;
  };
  std::vector<Task> tasks;
  for (std::int64_t T : config.horizons)
    for (int s = 0; s < config.n_seeds; ++s) tasks.push_back({T, s});

  std::vector<RunArtifacts> results(tasks.size());
  const int jobs = config.jobs == 0
                       ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))
                       : config.jobs;
  parallel_for_index(tasks.size(), jobs, [&](std::size_t i) {
    results[i] = execute_run(config, tasks[i].T, tasks[i].seed);
  });

  // Deterministic write order regardless of worker scheduling.
  std::vector<RunStats> stats;
  stats.reserve(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& [T, seed] = tasks[i];
    write_file(dir / ("traj_T" + std::to_string(T) + "_s" + std::to_string(seed) + ".csv"),
               results[i].traj_csv);
    write_file(dir / ("run_T" + std::to_string(T) + "_s" + std::to_string(seed) + ".json"),
               results[i].run_json);
    stats.push_back({T, seed, results[i].final_regret});
  }

  json summary;
  summary["config"] = config_to_json(config);
  summary["algo"] = algo_kind_name(config.algo);
  summary["rng"] = std::string(RngStreams::algorithm_name());
  summary["seed_base"] = config.seed_base;
  summary["n_seeds"] = config.n_seeds;
  json per_t = json::array();
  std::size_t idx = 0;
  for (std::int64_t T : config.horizons) {
    std::vector<double> regrets;
    for (int s = 0; s < config.n_seeds; ++s) regrets.push_back(results[idx++].final_regret);
    per_t.push_back({{"T", T},
                     {"percentiles",
                      {{"p05", percentile(regrets, 5)},
                       {"p25", percentile(regrets, 25)},
                       {"p50", percentile(regrets, 50)},
                       {"p75", percentile(regrets, 75)},
                       {"p95", percentile(regrets, 95)}}}});
  }
  summary["per_T"] = std::move(per_t);
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  return stats;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw ConfigError("percentile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * pct / 100.0;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ConfigError("log-log fit needs positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double sign_test_pvalue(int wins, int n) {
  if (n < 1 || wins < 0 || wins > n) throw ConfigError("bad sign test arguments");
  // P(Bin(n, 1/2) >= wins), exact.
  double p = 0.0;
  for (int i = wins; i <= n; ++i)
    p += std::exp(std::lgamma(n + 1) - std::lgamma(i + 1) - std::lgamma(n - i + 1) -
                  n * std::log(2.0));
  return std::min(p, 1.0);
}

ScalingReport summarize(const std::filesystem::path& primary_dir,
                        const std::vector<std::filesystem::path>& baseline_dirs,
                        std::string* rendered_table) {
  const json primary = read_json_file(primary_dir / "summary.json");
  ScalingReport rep;
  const auto& per_t = primary.at("per_T");
  if (per_t.size() < 3) throw ConfigError("need at least 3 distinct T values");
  if (primary.at("n_seeds").get<int>() < 20) throw ConfigError("need at least 20 seeds");
  for (const auto& entry : per_t) {
    rep.horizons.push_back(entry.at("T").get<std::int64_t>());
    rep.median.push_back(entry.at("percentiles").at("p50").get<double>());
    rep.p95.push_back(entry.at("percentiles").at("p95").get<double>());
  }
  std::vector<double> ts(rep.horizons.begin(), rep.horizons.end());
  rep.slope = fit_loglog_slope(ts, rep.median);

  for (const auto& dir : baseline_dirs) {
    const json base = read_json_file(dir / "summary.json");
    const std::string name = base.at("algo").get<std::string>();
    std::vector<double> med;
    for (const auto& entry : base.at("per_T")) {
      const std::int64_t T = entry.at("T").get<std::int64_t>();
      const std::size_t i = med.size();
      if (i >= rep.horizons.size() || rep.horizons[i] != T)
        throw ConfigError("baseline sweep horizons do not match the primary sweep");
      med.push_back(entry.at("percentiles").at("p50").get<double>());
    }
    rep.baseline_median[name] = std::move(med);
  }

  if (rendered_table) {
    std::ostringstream os;
    os << "log-log slope of median regret: " << format_double(rep.slope) << "\n";
    os << "T,median,p95,p95_over_p50";
    for (const auto& [name, _] : rep.baseline_median) os << ",median_" << name;
    os << "\n";
    for (std::size_t i = 0; i < rep.horizons.size(); ++i) {
      os << rep.horizons[i] << "," << format_double(rep.median[i]) << ","
         << format_double(rep.p95[i]) << "," << format_double(rep.p95[i] / rep.median[i]);
      for (const auto& [_, med] : rep.baseline_median) os << "," << format_double(med[i]);
      os << "\n";
    }
    *rendered_table = os.str();
  }
  return rep;
}

}  // namespace xlearn
