#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "d2md/convex.hpp"
#include "d2md/model.hpp"
#include "d2md/types.hpp"

namespace d2md {

enum class Objective { Gee, Mee };

const char* to_string(Objective objective);
Objective parse_objective(const std::string& name);

struct ScaCoefficients {
  double a = 0.0;
  double b = 0.0;
};

/// Tangent minorant log2(1 + g) >= a log2 g + b at g = gamma_bar.
ScaCoefficients sca_params(double gamma_bar);

/// Anchors and minorant coefficients for every rate term of one assignment.
/// Receiver entries are indexed by rx(k, r, m) and left at zero on unused channels.
struct SCAParams {
  std::vector<double> gamma_bar_cue, a_cue, b_cue;
  std::vector<double> gamma_bar_rx, a_rx, b_rx;
  std::vector<std::size_t> rx_offset{0};
  std::size_t channels = 0;

  std::size_t rx(std::size_t k, std::size_t r, std::size_t m) const { return (rx_offset[k] + r) * channels + m; }
};

/// Anchors at the SINRs of `op`. Throws DomainError if an anchor SINR is not positive.
SCAParams anchor_at(const OperatingPoint& op);

struct SolverConfig {
  double dinkelbach_eps = 1e-6;
  int dinkelbach_max_iter = 100;
  int sca_max_iter = 50;
  double sca_rel_tol = 1e-4;
  int inner_max_iter = 30;  // feasibility restoration rounds
  double inner_grad_tol = 1e-6;

  void validate() const;
};

inline constexpr double kPowerFloor = 1e-12;  // W; anything at or below is reported as zero

/// Concave subproblem in q = log2 p for a fixed assignment and fixed anchors.
///
/// Base variables are q for every CUE, q for every assigned (group, channel)
/// pair and one epigraph variable per pair bounded by every receiver's
/// minorant. The MEE program appends the max-min variable z; phase one
/// appends the infeasibility variable s instead.
class PowerSubproblem {
 public:
  PowerSubproblem(const Scenario& scenario, const GainTable& gains, const Assignment& assignment,
                  Objective objective);

  void set_anchors(const SCAParams& sca);

  std::size_t num_pairs() const { return pairs_.size(); }
  std::size_t base_vars() const { return M_ + 2 * pairs_.size(); }
  std::size_t q_cue(std::size_t m) const { return m; }
  std::size_t q_pair(std::size_t p) const { return M_ + p; }
  std::size_t t_pair(std::size_t p) const { return M_ + pairs_.size() + p; }
  std::size_t extra() const { return base_vars(); }
  const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const { return pairs_; }

  ConvexProgram phase_two(double lambda) const;
  ConvexProgram phase_one() const;
  bool has_soft_constraints() const { return !soft_.empty(); }

  /// Base variables for `powers`, pulled strictly inside the hard constraints.
  Vec encode(const PowerAllocation& powers) const;
  /// Raw powers 2^q on assigned channels, zero elsewhere.
  PowerAllocation powers(const Vec& x) const;

  /// Largest soft-constraint value at base point x.
  double max_soft_violation(const Vec& x) const;
  /// Re-tightens every epigraph variable to just below its receivers' minorants.
  void tighten(Vec& x, double margin) const;

  /// Surrogate ratios at base point x: one entry for GEE, one per active user for MEE.
  std::vector<double> numerators(const Vec& x) const;
  std::vector<double> denominators(const Vec& x) const;

  /// Phase-two start for `lambda` from base point x (appends z for MEE).
  Vec lift(const Vec& x, double lambda) const;

 private:
  SmoothFunction receiver_minorant(std::size_t p, std::size_t r) const;
  SmoothFunction cue_minorant(std::size_t m) const;

  const Scenario& scenario_;
  const GainTable& gains_;
  const Assignment& assignment_;
  Objective objective_;
  std::size_t M_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<std::vector<std::size_t>> pairs_of_group_;
  std::vector<long> pair_index_;  // k * M + m -> pair or -1

  std::vector<SmoothFunction> hard_;
  std::vector<SmoothFunction> soft_;
  std::vector<SmoothFunction> family_f_;
  std::vector<SmoothFunction> family_g_;
  SCAParams sca_;
  std::vector<std::vector<SmoothFunction>> minorants_;  // per pair, per receiver
  std::vector<SmoothFunction> cue_minorants_;
};

struct InnerSolution {
  Vec x;  // base variables
  PowerAllocation powers;
  double F = 0.0;
  double ratio = 0.0;
  double kkt_residual = 0.0;
  int newton_steps = 0;
};

/// One inner step: maximise the surrogate f - lambda g (GEE) or
/// min_i (f_i - lambda g_i) (MEE) from the strictly feasible base point `start`.
InnerSolution solve_inner(const PowerSubproblem& sub, double lambda, const Vec& start);

/// Convenience form: anchors, restoration and one inner solve for the given
/// assignment. `initial` defaults to the uniform split.
InnerSolution solve_inner(double lambda, const SCAParams& sca, const Assignment& assignment, const GainTable& gains,
                          const Scenario& scenario, Objective objective,
                          const std::optional<PowerAllocation>& initial = std::nullopt);

struct PowerDiagnostics {
  int sca_rounds = 0;  // one Dinkelbach solve of a re-anchored surrogate each
  int dinkelbach_iterations = 0;  // inner solves summed over SCA rounds
  int restoration_rounds = 0;
  int newton_steps = 0;
  double kkt_residual = 0.0;  // worst over accepted inner solves
  bool converged = false;
  std::vector<double> lambda_trace;
  std::vector<double> objective_trace;  // true objective, initial point first
};

nlohmann::json to_json(const PowerDiagnostics& d);

struct PowerResult {
  PowerAllocation powers;
  Metrics metrics;
  double objective = 0.0;  // GEE or WEE under true rates
  bool feasible = false;
  PowerDiagnostics diagnostics;
};

/// Uniform split of each group's budget over its assigned channels, CUEs at full power.
PowerAllocation uniform_powers(const Scenario& scenario, const Assignment& assignment);

/// Returns an explicit upper bound violation message if some rate target cannot be
/// met even with every interferer silent and own power at budget.
std::optional<std::string> corner_infeasibility(const Scenario& scenario, const GainTable& gains,
                                                const Assignment& assignment);

/// SCA outer loop with (generalized) Dinkelbach on each surrogate.
/// Throws Infeasible when no admissible powers exist for `assignment`.
PowerResult optimize_power(const Assignment& assignment, const GainTable& gains, const Scenario& scenario,
                           Objective objective, const SolverConfig& config = {});

double objective_value(const Metrics& m, Objective objective);

}  // namespace d2md
