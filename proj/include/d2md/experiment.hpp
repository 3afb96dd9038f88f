#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "d2md/optimizer.hpp"
#include "d2md/scenario.hpp"

namespace d2md {

struct SweepPoint {
  double max_power_dbm = 10.0;
  int num_groups = 5;
  int num_channels = 5;
  int reuse_factor = 1;
  int split_factor = 1;
  double min_rate = 0.1;

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

enum class Algorithm { Matching, Greedy };

struct ExperimentConfig {
  std::string name = "experiment";
  GeneratorParams scenario;  // non-swept fields; watts
  std::vector<double> max_power_dbm{10.0};
  std::vector<int> num_groups{5};
  std::vector<int> num_channels{5};
  std::vector<int> reuse_factor{1};
  std::vector<int> split_factor{1};
  std::vector<double> min_rate{0.1};
  Objective objective = Objective::Gee;
  Regime regime = Regime::OneToOne;
  Algorithm algorithm = Algorithm::Matching;
  int replications = 200;
  std::uint64_t base_seed = 1;
  int attempt_factor = 10;
  int threads = 1;
  JointConfig joint;

  void validate() const;
  std::vector<SweepPoint> sweep() const;
};

inline constexpr int kPaperReplications = 200;
inline constexpr int kCiReplications = 20;

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void apply_profile(ExperimentConfig& config, const std::string& profile);

/// Generator parameters of one sweep point.
GeneratorParams generator_for(const ExperimentConfig& config, const SweepPoint& point);

struct ReplicationOutcome {
  std::uint64_t seed = 0;
  bool feasible = false;
  std::string failure;  // empty when feasible
  std::optional<Solution> solution;
  std::optional<JointTrace> trace;
};

/// One seeded replication: draw an instance and solve it.
ReplicationOutcome run_replication(const ExperimentConfig& config, const SweepPoint& point, std::uint64_t seed,
                                   bool trace = false);

struct ResultRow {
  SweepPoint point;
  double mean_gee = 0.0;
  double se_gee = 0.0;
  double mean_wee = 0.0;
  double se_wee = 0.0;
  double mean_aggregate_rate = 0.0;
  double mean_user_rate = 0.0;
  double mean_min_user_rate = 0.0;
  double mean_total_power = 0.0;
  int feasible_count = 0;
  int infeasible_count = 0;
  bool attempt_cap_exceeded = false;
  double mean_matcher_iterations = 0.0;
  double mean_dinkelbach_rounds = 0.0;

  int attempts() const { return feasible_count + infeasible_count; }
};

struct ExperimentTrace {
  std::vector<nlohmann::json> points;  // first feasible replication of every sweep point
};

using ProgressFn = std::function<void(const SweepPoint&, const ResultRow&)>;

/// Replication i of every sweep point uses seed base_seed + i. Replications are
/// accepted in seed order until `replications` are feasible or
/// attempt_factor * replications attempts are spent.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, ExperimentTrace* trace = nullptr,
                                      const ProgressFn& progress = {});

std::vector<std::string> csv_header();
std::string format_number(double v);
std::string csv_line(const ResultRow& row);
void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
std::string to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(const std::string& text);

}  // namespace d2md
