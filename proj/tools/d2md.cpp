// Batch runner for the D2MD joint channel/power allocation engine.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "d2md/experiment.hpp"
#include "d2md/optimizer.hpp"
#include "d2md/scenario_io.hpp"

using namespace d2md;

namespace {

int cmd_run(const std::string& config_path, const std::string& out, std::optional<int> replications,
            std::optional<std::uint64_t> seed, const std::string& profile, bool trace, std::optional<int> threads,
            bool quiet) {
  ExperimentConfig cfg = load_config(config_path);
  if (!profile.empty()) apply_profile(cfg, profile);
  if (replications) cfg.replications = *replications;
  if (seed) cfg.base_seed = *seed;
  if (threads) cfg.threads = *threads;
  cfg.validate();

  ExperimentTrace tr;
  auto progress = [&](const SweepPoint& p, const ResultRow& r) {
    if (quiet) return;
    std::cerr << "[" << cfg.name << "] P=" << p.max_power_dbm << " dBm K=" << p.num_groups << " M=" << p.num_channels
              << " r=" << p.reuse_factor << " s=" << p.split_factor << " Rmin=" << p.min_rate
              << "  feasible " << r.feasible_count << "/" << r.attempts() << "  GEE " << format_number(r.mean_gee)
              << (r.attempt_cap_exceeded ? "  (attempt cap hit)" : "") << '\n';
  };
  const auto rows = run_experiment(cfg, trace ? &tr : nullptr, progress);

  if (out.empty()) {
    std::cout << to_csv(rows);
  } else {
    emit_csv(rows, out);
  }
  if (trace) {
    const std::string path = (out.empty() ? cfg.name : out) + ".trace.json";
    std::ofstream t(path);
    if (!t) throw Error("cannot write " + path);
    t << nlohmann::json(tr.points).dump(2) << '\n';
    if (!quiet) std::cerr << "trace written to " << path << '\n';
  }
  return 0;
}

int cmd_generate(const std::string& config_path, const std::string& out, std::uint64_t seed, std::size_t point) {
  const ExperimentConfig cfg = load_config(config_path);
  const auto sweep = cfg.sweep();
  if (point >= sweep.size()) throw ConfigError("sweep point index out of range");
  const Instance inst = generate_instance(generator_for(cfg, sweep[point]), seed);
  const std::string text = to_json(inst).dump(2);
  if (out.empty()) {
    std::cout << text << '\n';
  } else {
    save_instance(out, inst);
  }
  return 0;
}

int cmd_solve(const std::string& instance_path, const std::string& objective, const std::string& regime,
              const std::string& algorithm, int grid) {
  const Instance inst = load_instance(instance_path);
  const Objective obj = parse_objective(objective);
  const Regime reg = parse_regime(regime);
  Solution sol;
  JointTrace jt;
  if (algorithm == "matching") {
    sol = solve_joint(inst.scenario, inst.gains, obj, reg, {}, nullptr, &jt);
  } else if (algorithm == "greedy") {
    sol = greedy_baseline(inst.scenario, inst.gains, obj, reg);
  } else if (algorithm == "oracle") {
    sol = exhaustive_oracle(inst.scenario, inst.gains, obj, reg, grid,
                            grid > 0 ? OracleMode::Discrete : OracleMode::Continuous);
  } else {
    throw ConfigError("unknown algorithm '" + algorithm + "'");
  }
  nlohmann::json j = to_json(sol);
  j["assignment_text"] = sol.assignment.to_string();
  if (algorithm == "matching") {
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& m : jt.matching) iters.push_back(to_json(m));
    j["matching_trace"] = iters;
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"D2MD energy-efficient channel and power allocation"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment config and write a CSV table");
  std::string config_path, out, profile;
  std::optional<int> replications, threads;
  std::optional<std::uint64_t> seed;
  bool trace = false, quiet = false;
  run->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "CSV output path (stdout if omitted)");
  run->add_option("--replications", replications, "feasible replications per sweep point")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "base seed");
  run->add_option("--profile", profile, "replication profile")->check(CLI::IsMember({"ci", "paper"}));
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--trace", trace, "dump matching and solver traces next to the CSV");
  run->add_flag("-q,--quiet", quiet, "no progress on stderr");

  auto* gen = app.add_subcommand("generate", "draw one instance from a config's generator");
  std::string gen_config, gen_out;
  std::uint64_t gen_seed = 1;
  std::size_t gen_point = 0;
  gen->add_option("config", gen_config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "instance output path (stdout if omitted)");
  gen->add_option("--seed", gen_seed, "instance seed");
  gen->add_option("--point", gen_point, "sweep point index");

  auto* solve = app.add_subcommand("solve", "solve one instance file and print the solution");
  std::string inst_path, objective = "gee", regime = "one_to_one", algorithm = "matching";
  int grid = 0;
  solve->add_option("instance", inst_path, "instance (JSON)")->required()->check(CLI::ExistingFile);
  solve->add_option("--objective", objective, "gee or mee");
  solve->add_option("--regime", regime, "one_to_one, many_to_one or many_to_many");
  solve->add_option("--algorithm", algorithm, "matching, greedy or oracle");
  solve->add_option("--grid", grid, "oracle power grid levels (0 = continuous)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, out, replications, seed, profile, trace, threads, quiet);
    if (*gen) return cmd_generate(gen_config, gen_out, gen_seed, gen_point);
    if (*solve) return cmd_solve(inst_path, objective, regime, algorithm, grid);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
