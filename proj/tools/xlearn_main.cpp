#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "xlearn/sweep.hpp"

namespace {

using nlohmann::json;
using namespace xlearn;

// Flags override the config file; the config file overrides defaults.
void apply_config_file(const std::string& path, RunConfig& cfg, std::string& env_name,
                       std::string& algo_name) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config file: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file parse error: " + std::string(e.what()));
  }
  if (j.contains("env")) {
    const json& e = j["env"];
    if (e.contains("kind")) env_name = e["kind"].get<std::string>();
    if (e.contains("K")) cfg.env.K = e["K"].get<int>();
    if (e.contains("C")) cfg.env.C = e["C"].get<int>();
    if (e.contains("env_seed")) cfg.env.env_seed = e["env_seed"].get<std::uint64_t>();
    if (e.contains("segments")) cfg.env.segments = e["segments"].get<int>();
    if (e.contains("jitter")) cfg.env.jitter = e["jitter"].get<bool>();
    if (e.contains("value_grid")) cfg.env.value_grid = e["value_grid"].get<std::vector<double>>();
    if (e.contains("bid_grid")) cfg.env.bid_grid = e["bid_grid"].get<std::vector<double>>();
    if (e.contains("availability"))
      cfg.env.availability = e["availability"].get<std::vector<std::vector<int>>>();
    if (e.contains("nu")) cfg.env.nu_override = e["nu"].get<std::vector<double>>();
  }
  if (j.contains("algo")) algo_name = j["algo"].get<std::string>();
  if (j.contains("T")) cfg.horizons = j["T"].get<std::vector<std::int64_t>>();
  if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
  if (j.contains("schedule_iota")) cfg.schedule_iota = j["schedule_iota"].get<double>();
  if (j.contains("seed_base")) cfg.seed_base = j["seed_base"].get<std::uint64_t>();
  if (j.contains("n_seeds")) cfg.n_seeds = j["n_seeds"].get<int>();
  if (j.contains("thin")) cfg.thin = j["thin"].get<std::int64_t>();
  if (j.contains("emit_decomposition")) cfg.emit_decomposition = j["emit_decomposition"].get<bool>();
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
}

int run_main(int argc, char** argv) {
  CLI::App app{"Cross-learning contextual bandit sweep harness"};
  app.require_subcommand(0, 1);

  RunConfig cfg;
  cfg.env.kind = EnvKind::kShifting;
  cfg.env.K = 5;
  cfg.env.C = 5;
  cfg.env.segments = 4;
  if (const char* d = std::getenv("XLEARN_OUT_DIR")) cfg.out_dir = d;

  std::string env_name = "shifting";
  std::string algo_name = "crosslearn";
  std::string config_path;
  std::vector<std::int64_t> horizons_flag;
  std::optional<int> k_flag, c_flag, seeds_flag, jobs_flag, segments_flag;
  std::optional<double> delta_flag;
  std::optional<std::uint64_t> seed_base_flag, env_seed_flag;
  std::optional<std::int64_t> thin_flag;
  std::optional<std::string> out_flag, env_flag, algo_flag;
  bool emit_decomposition_flag = false;

  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("--env", env_flag, "environment kind: shifting | auction | sleeping");
  app.add_option("--algo", algo_flag,
                 "crosslearn | per_context_exp3ix | known_nu_cross | uniform");
  app.add_option("--K", k_flag, "number of arms");
  app.add_option("--C", c_flag, "number of contexts");
  app.add_option("--T", horizons_flag, "horizon; repeat for a sweep")->expected(-1);
  app.add_option("--delta", delta_flag, "confidence parameter in (0,1)");
  app.add_option("--seeds", seeds_flag, "number of seeds");
  app.add_option("--seed-base", seed_base_flag, "first master seed");
  app.add_option("--env-seed", env_seed_flag, "environment seed base");
  app.add_option("--segments", segments_flag, "shifting environment segment count");
  app.add_option("--thin", thin_flag, "record every Nth round in trajectory files");
  app.add_flag("--emit-decomposition", emit_decomposition_flag,
               "include the regret decomposition in per-run reports");
  app.add_option("--out", out_flag, "output directory (default $XLEARN_OUT_DIR)");
  app.add_option("--jobs", jobs_flag, "worker threads; 0 = hardware concurrency");

  auto* summ = app.add_subcommand("summarize", "scaling report from finished sweeps");
  std::string primary_dir;
  std::vector<std::string> baseline_dirs;
  std::string report_out;
  summ->add_option("primary", primary_dir, "sweep directory of the main algorithm")->required();
  summ->add_option("--baseline", baseline_dirs, "baseline sweep directory; repeatable");
  summ->add_option("--report", report_out, "write scaling_report.json here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  if (summ->parsed()) {
    std::string table;
    ScalingReport rep = summarize(primary_dir, {baseline_dirs.begin(), baseline_dirs.end()},
                                  &table);
    std::cout << table;
    if (!report_out.empty()) {
      json j;
      j["slope"] = rep.slope;
      j["T"] = rep.horizons;
      j["median"] = rep.median;
      j["p95"] = rep.p95;
      for (const auto& [name, med] : rep.baseline_median) j["baseline_median"][name] = med;
      std::ofstream f(report_out, std::ios::binary);
      if (!f) throw IoError("cannot write report: " + report_out);
      f << j.dump(2) << "\n";
    }
    return 0;
  }

  if (!config_path.empty()) apply_config_file(config_path, cfg, env_name, algo_name);
  if (env_flag) env_name = *env_flag;
  if (algo_flag) algo_name = *algo_flag;
  if (k_flag) cfg.env.K = *k_flag;
  if (c_flag) cfg.env.C = *c_flag;
  if (!horizons_flag.empty()) cfg.horizons = horizons_flag;
  if (delta_flag) cfg.delta = *delta_flag;
  if (seeds_flag) cfg.n_seeds = *seeds_flag;
  if (seed_base_flag) cfg.seed_base = *seed_base_flag;
  if (env_seed_flag) cfg.env.env_seed = *env_seed_flag;
  if (segments_flag) cfg.env.segments = *segments_flag;
  if (thin_flag) cfg.thin = *thin_flag;
  if (emit_decomposition_flag) cfg.emit_decomposition = true;
  if (out_flag) cfg.out_dir = *out_flag;
  if (jobs_flag) cfg.jobs = *jobs_flag;

  try {
    cfg.env.kind = parse_env_kind(env_name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  cfg.algo = parse_algo_kind(algo_name);

  // Auction grids default to evenly spaced values when not configured.
  if (cfg.env.kind == EnvKind::kAuction) {
    if (cfg.env.value_grid.empty())
      for (int c = 0; c < cfg.env.C; ++c)
        cfg.env.value_grid.push_back((c + 1.0) / (cfg.env.C + 1.0));
    if (cfg.env.bid_grid.empty())
      for (int a = 0; a < cfg.env.K; ++a) cfg.env.bid_grid.push_back((a + 1.0) / (cfg.env.K + 1.0));
  }
  // Sleeping availability defaults to seeded half-size subsets.
  if (cfg.env.kind == EnvKind::kSleeping && cfg.env.availability.empty()) {
    for (int c = 0; c < cfg.env.C; ++c) {
      std::vector<int> set;
      for (int a = 0; a < cfg.env.K; ++a)
        if (mix64(cfg.env.env_seed, 0x417661696cULL, static_cast<std::uint64_t>(c),
                  static_cast<std::uint64_t>(a)) %
                2 ==
            0)
          set.push_back(a);
      if (set.empty()) set.push_back(static_cast<int>(
          mix64(cfg.env.env_seed, 0x417661696cULL, static_cast<std::uint64_t>(c)) %
          static_cast<std::uint64_t>(cfg.env.K)));
      cfg.env.availability.push_back(std::move(set));
    }
  }

  const auto stats = run_sweep(cfg);
  std::cout << "wrote " << 2 * stats.size() + 1 << " files to " << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
