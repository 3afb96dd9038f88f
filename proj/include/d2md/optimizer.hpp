#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "d2md/matching.hpp"
#include "d2md/model.hpp"
#include "d2md/power.hpp"
#include "d2md/types.hpp"

namespace d2md {

enum class Regime { OneToOne, ManyToOne, ManyToMany };

const char* to_string(Regime regime);
Regime parse_regime(const std::string& name);

/// (split, reuse) capacities a regime actually uses on `scenario`.
std::pair<int, int> regime_capacities(const Scenario& scenario, Regime regime);

struct Solution {
  Assignment assignment;
  PowerAllocation powers;
  Metrics metrics;
  double objective = 0.0;
  bool feasible = false;
  int outer_iterations = 0;    // power optimisations performed
  int matcher_iterations = 0;  // matching runs, the confirming run included
  int dinkelbach_rounds = 0;   // SCA rounds of the returned iterate
  PowerDiagnostics diagnostics;
};

nlohmann::json to_json(const Solution& s);

struct JointConfig {
  SolverConfig solver;
  int max_outer = 20;
};

struct JointTrace {
  std::vector<MatchTrace> matching;
  std::vector<Assignment> assignments;
  std::vector<double> objectives;  // NaN where the iterate was infeasible
};

/// Alternates matching and power control until an assignment recurs or
/// `max_outer` iterations pass. Returns the best feasible iterate. `warm`
/// seeds the first preference lists with an earlier solution's powers and
/// serves as the initial incumbent.
/// Throws Infeasible when no iterate is feasible.
Solution solve_joint(const Scenario& scenario, const GainTable& gains, Objective objective, Regime regime,
                     const JointConfig& config = {}, const Solution* warm = nullptr, JointTrace* trace = nullptr);

/// Commits one (group, channel) pair per step, the one whose re-optimised
/// committed system scores best; stops once every group is served and no
/// pairing improves the objective.
Solution greedy_baseline(const Scenario& scenario, const GainTable& gains, Objective objective, Regime regime,
                         const JointConfig& config = {});

/// Every K x M binary matrix with row sums <= split and column sums <= reuse.
std::vector<Assignment> enumerate_assignments(std::size_t groups, std::size_t channels, int split, int reuse);

enum class OracleMode { Continuous, Discrete };

inline constexpr std::size_t kOracleMaxCells = 12;
inline constexpr int kOracleMaxGrid = 8;
inline constexpr double kOracleMaxGridPoints = 2e6;

/// Best feasible solution over all capacity-valid assignments, with powers
/// from optimize_power (continuous) or a uniform grid over [0, budget]
/// (discrete). Throws InstanceTooLarge past the size guards, Infeasible when
/// nothing is feasible.
Solution exhaustive_oracle(const Scenario& scenario, const GainTable& gains, Objective objective, Regime regime,
                           int power_grid_size, OracleMode mode = OracleMode::Continuous,
                           const JointConfig& config = {});

}  // namespace d2md
