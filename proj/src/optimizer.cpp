#include "d2md/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace d2md {

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::OneToOne: return "one_to_one";
    case Regime::ManyToOne: return "many_to_one";
    case Regime::ManyToMany: return "many_to_many";
  }
  return "?";
}

Regime parse_regime(const std::string& name) {
  if (name == "one_to_one") return Regime::OneToOne;
  if (name == "many_to_one") return Regime::ManyToOne;
  if (name == "many_to_many") return Regime::ManyToMany;
  throw ConfigError("unknown regime '" + name + "'");
}

std::pair<int, int> regime_capacities(const Scenario& scenario, Regime regime) {
  switch (regime) {
    case Regime::OneToOne: return {1, 1};
    case Regime::ManyToOne: return {1, scenario.reuse_factor};
    case Regime::ManyToMany: return {scenario.split_factor, scenario.reuse_factor};
  }
  return {1, 1};
}

nlohmann::json to_json(const Solution& s) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < s.assignment.num_groups(); ++k) rows.push_back(s.assignment.channels_of(k));
  return {{"assignment", rows},
          {"p_cue_w", s.powers.cue},
          {"p_grp_w", s.powers.group},
          {"gee", s.metrics.gee},
          {"wee", s.metrics.wee},
          {"aggregate_rate", s.metrics.aggregate_rate()},
          {"total_power_w", s.metrics.total_power},
          {"feasible", s.feasible},
          {"outer_iterations", s.outer_iterations},
          {"matcher_iterations", s.matcher_iterations},
          {"dinkelbach_rounds", s.dinkelbach_rounds},
          {"power", to_json(s.diagnostics)}};
}

namespace {

Solution from_power(const Assignment& a, PowerResult&& pr) {
  Solution s;
  s.assignment = a;
  s.powers = std::move(pr.powers);
  s.metrics = std::move(pr.metrics);
  s.objective = pr.objective;
  s.feasible = pr.feasible;
  s.dinkelbach_rounds = pr.diagnostics.sca_rounds;
  s.diagnostics = std::move(pr.diagnostics);
  return s;
}

std::optional<PowerResult> try_power(const Assignment& a, const GainTable& gains, const Scenario& scenario,
                                     Objective objective, const SolverConfig& cfg) {
  try {
    auto pr = optimize_power(a, gains, scenario, objective, cfg);
    if (!pr.feasible) return std::nullopt;
    return pr;
  } catch (const Infeasible&) {
    return std::nullopt;
  }
}

MatchResult run_matching(const Scenario& scenario, const GainTable& gains, const PowerAllocation& pref_powers,
                         Regime regime, MatchTrace* trace) {
  const auto [split, reuse] = regime_capacities(scenario, regime);
  const Assignment empty(scenario.num_groups(), scenario.num_channels());
  auto initial = build_preferences(empty, pref_powers, gains, scenario);
  auto update = [&](const Assignment& partial) { return build_preferences(partial, pref_powers, gains, scenario); };
  return match_rounds(initial, reuse, split, update, trace);
}

bool better(double candidate, double incumbent) {
  if (!std::isfinite(incumbent)) return candidate > incumbent;
  return candidate > incumbent + 1e-12 * std::max(1.0, std::abs(incumbent));
}

}  // namespace

Solution solve_joint(const Scenario& scenario, const GainTable& gains, Objective objective, Regime regime,
                     const JointConfig& config, const Solution* warm, JointTrace* trace) {
  PowerAllocation pref = warm ? prospective_powers(scenario, warm->assignment, warm->powers)
                              : initial_preference_powers(scenario);
  std::optional<Solution> best;
  if (warm && warm->feasible) best = *warm;
  // Optimised powers depend only on the assignment, so a recurring assignment
  // means the alternation has entered a cycle it will never leave.
  std::vector<Assignment> seen;
  if (warm) seen.push_back(warm->assignment);
  int matcher_runs = 0;
  int power_runs = 0;
  for (int outer = 0; outer < config.max_outer; ++outer) {
    MatchTrace mt;
    const MatchResult mr = run_matching(scenario, gains, pref, regime, trace ? &mt : nullptr);
    ++matcher_runs;
    if (trace) trace->matching.push_back(std::move(mt));
    if (std::find(seen.begin(), seen.end(), mr.assignment) != seen.end()) break;
    seen.push_back(mr.assignment);
    ++power_runs;
    auto pr = try_power(mr.assignment, gains, scenario, objective, config.solver);
    if (trace) {
      trace->assignments.push_back(mr.assignment);
      trace->objectives.push_back(pr ? pr->objective : std::numeric_limits<double>::quiet_NaN());
    }
    if (pr) {
      pref = prospective_powers(scenario, mr.assignment, pr->powers);
      if (!best || better(pr->objective, best->objective)) best = from_power(mr.assignment, std::move(*pr));
    } else {
      pref = prospective_powers(scenario, mr.assignment, uniform_powers(scenario, mr.assignment));
    }
  }
  if (!best) throw Infeasible("no feasible outer iterate");
  best->matcher_iterations = matcher_runs;
  best->outer_iterations = power_runs;
  return *best;
}

Solution greedy_baseline(const Scenario& scenario, const GainTable& gains, Objective objective, Regime regime,
                         const JointConfig& config) {
  const std::size_t K = scenario.num_groups();
  const std::size_t M = scenario.num_channels();
  const auto [split, reuse] = regime_capacities(scenario, regime);
  Assignment committed(K, M);
  double current = -std::numeric_limits<double>::infinity();
  int steps = 0;

  // Groups without a channel yet are exempt from their rate targets.
  auto relaxed = [&](const Assignment& a) {
    Scenario s = scenario;
    for (std::size_t k = 0; k < K; ++k)
      if (a.row_sum(k) == 0) s.min_rate_group[k] = 0.0;
    return s;
  };

  for (;;) {
    std::optional<Assignment> pick;
    double pick_value = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t m = 0; m < M; ++m) {
        if (committed(k, m) || committed.row_sum(k) >= split || committed.col_sum(m) >= reuse) continue;
        Assignment trial = committed;
        trial.set(k, m, true);
        const Scenario s = relaxed(trial);
        auto pr = try_power(trial, gains, s, objective, config.solver);
        ++steps;
        if (pr && better(pr->objective, pick_value)) {
          pick_value = pr->objective;
          pick = trial;
        }
      }
    if (!pick) break;
    bool unserved = false;
    for (std::size_t k = 0; k < K; ++k) unserved = unserved || committed.row_sum(k) == 0;
    if (!unserved && !better(pick_value, current)) break;
    committed = *pick;
    current = pick_value;
  }

  auto pr = try_power(committed, gains, scenario, objective, config.solver);
  if (!pr) throw Infeasible("greedy baseline found no feasible assignment");
  Solution sol = from_power(committed, std::move(*pr));
  sol.outer_iterations = steps;
  sol.matcher_iterations = 0;
  return sol;
}

std::vector<Assignment> enumerate_assignments(std::size_t groups, std::size_t channels, int split, int reuse) {
  const std::size_t cells = groups * channels;
  if (cells >= 63) throw InstanceTooLarge("too many cells to enumerate");
  std::vector<Assignment> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells); ++mask) {
    Assignment a(groups, channels);
    for (std::size_t c = 0; c < cells; ++c)
      if (mask >> c & 1U) a.set(c / channels, c % channels, true);
    if (a.respects(split, reuse)) out.push_back(std::move(a));
  }
  return out;
}

namespace {

// Uniform power grid over [0, budget] for every CUE and every assigned pair.
std::optional<Solution> best_on_grid(const Assignment& a, const GainTable& gains, const Scenario& scenario,
                                     Objective objective, int levels) {
  const std::size_t K = scenario.num_groups();
  const std::size_t M = scenario.num_channels();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M; ++m)
      if (a(k, m)) pairs.emplace_back(k, m);
  const std::size_t dims = M + pairs.size();
  std::vector<int> idx(dims, 0);
  PowerAllocation p(K, M);
  std::optional<Solution> best;
  const double step = 1.0 / (levels - 1);
  for (;;) {
    for (std::size_t m = 0; m < M; ++m) p.cue[m] = scenario.max_power_cue[m] * idx[m] * step;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      p.grp(pairs[i].first, pairs[i].second) = scenario.max_power_group[pairs[i].first] * idx[M + i] * step;
    const OperatingPoint op{scenario, gains, a, p};
    if (check_feasible(op).all()) {
      Metrics mt = metrics(op);
      const double v = objective_value(mt, objective);
      if (!best || better(v, best->objective)) {
        Solution s;
        s.assignment = a;
        s.powers = p;
        s.metrics = std::move(mt);
        s.objective = v;
        s.feasible = true;
        best = std::move(s);
      }
    }
    std::size_t d = 0;
    while (d < dims && ++idx[d] == levels) idx[d++] = 0;
    if (d == dims) break;
  }
  return best;
}

}  // namespace

Solution exhaustive_oracle(const Scenario& scenario, const GainTable& gains, Objective objective, Regime regime,
                           int power_grid_size, OracleMode mode, const JointConfig& config) {
  const std::size_t K = scenario.num_groups();
  const std::size_t M = scenario.num_channels();
  if (K * M > kOracleMaxCells) throw InstanceTooLarge("oracle limited to K*M <= 12");
  if (power_grid_size > kOracleMaxGrid) throw InstanceTooLarge("oracle power grid limited to 8 levels");
  if (mode == OracleMode::Discrete && power_grid_size < 2) throw DomainError("power grid needs at least 2 levels");
  const auto [split, reuse] = regime_capacities(scenario, regime);
  const auto all = enumerate_assignments(K, M, split, reuse);
  if (mode == OracleMode::Discrete) {
    double points = 0.0;
    for (const auto& a : all) points += std::pow(power_grid_size, static_cast<double>(M + a.total()));
    if (points > kOracleMaxGridPoints) throw InstanceTooLarge("oracle power grid has too many points");
  }
  std::optional<Solution> best;
  for (const auto& a : all) {
    bool skip = false;
    for (std::size_t k = 0; k < K; ++k) skip = skip || (a.row_sum(k) == 0 && scenario.min_rate_group[k] > 0.0);
    if (skip) continue;
    std::optional<Solution> cand;
    if (mode == OracleMode::Continuous) {
      if (auto pr = try_power(a, gains, scenario, objective, config.solver)) cand = from_power(a, std::move(*pr));
    } else {
      cand = best_on_grid(a, gains, scenario, objective, power_grid_size);
    }
    if (cand && (!best || better(cand->objective, best->objective))) best = std::move(cand);
  }
  if (!best) throw Infeasible("no capacity-valid assignment is feasible");
  best->outer_iterations = static_cast<int>(all.size());
  return *best;
}

}  // namespace d2md
