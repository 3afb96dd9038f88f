#include "d2md/power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace d2md {

namespace {

constexpr double kEpigraphFloor = -1e4;  // keeps phase one bounded
constexpr double kTightenMargin = 1e-7;
constexpr double kRestoreTarget = -1e-7;  // phase one stops once s is below this
constexpr double kBudgetShrink = 0.999;

PowerAllocation floor_to_zero(PowerAllocation p) {
  for (double& v : p.cue)
    if (v < 2.0 * kPowerFloor) v = 0.0;
  for (double& v : p.group)
    if (v < 2.0 * kPowerFloor) v = 0.0;
  return p;
}

double linf(const Vec& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace

const char* to_string(Objective objective) {
  return objective == Objective::Gee ? "gee" : "mee";
}

Objective parse_objective(const std::string& name) {
  if (name == "gee" || name == "GEE") return Objective::Gee;
  if (name == "mee" || name == "MEE" || name == "wee" || name == "WEE") return Objective::Mee;
  throw ConfigError("unknown objective '" + name + "'");
}

ScaCoefficients sca_params(double gamma_bar) {
  if (!(gamma_bar > 0.0) || !std::isfinite(gamma_bar))
    throw DomainError("sca_params: anchor SINR must be positive and finite");
  const double a = gamma_bar / (1.0 + gamma_bar);
  return {a, std::log2(1.0 + gamma_bar) - a * std::log2(gamma_bar)};
}

SCAParams anchor_at(const OperatingPoint& op) {
  const Scenario& s = op.scenario;
  const std::size_t M = s.num_channels();
  const std::size_t K = s.num_groups();
  SCAParams sca;
  sca.channels = M;
  for (std::size_t k = 0; k < K; ++k) sca.rx_offset.push_back(sca.rx_offset.back() + s.num_receivers(k));
  sca.gamma_bar_cue.resize(M);
  sca.a_cue.resize(M);
  sca.b_cue.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    const double g = sinr_cue(op, m);
    const auto c = sca_params(g);
    sca.gamma_bar_cue[m] = g;
    sca.a_cue[m] = c.a;
    sca.b_cue[m] = c.b;
  }
  const std::size_t n = sca.rx_offset.back() * M;
  sca.gamma_bar_rx.assign(n, 0.0);
  sca.a_rx.assign(n, 0.0);
  sca.b_rx.assign(n, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M; ++m) {
      if (!op.assignment(k, m)) continue;
      for (std::size_t r = 0; r < s.num_receivers(k); ++r) {
        const double g = sinr_d2d(op, k, r, m);
        const auto c = sca_params(g);
        const std::size_t i = sca.rx(k, r, m);
        sca.gamma_bar_rx[i] = g;
        sca.a_rx[i] = c.a;
        sca.b_rx[i] = c.b;
      }
    }
  return sca;
}

void SolverConfig::validate() const {
  if (!(dinkelbach_eps > 0.0) || dinkelbach_max_iter <= 0 || sca_max_iter <= 0 || !(sca_rel_tol > 0.0) ||
      inner_max_iter <= 0 || !(inner_grad_tol > 0.0))
    throw ConfigError("solver tolerances and iteration caps must be strictly positive");
}

PowerSubproblem::PowerSubproblem(const Scenario& scenario, const GainTable& gains, const Assignment& assignment,
                                 Objective objective)
    : scenario_(scenario),
      gains_(gains),
      assignment_(assignment),
      objective_(objective),
      M_(scenario.num_channels()) {
  const std::size_t K = scenario.num_groups();
  if (assignment.num_groups() != K || assignment.num_channels() != M_)
    throw DomainError("assignment dimensions do not match the scenario");
  if (!assignment.respects(scenario.split_factor, scenario.reuse_factor))
    throw DomainError("assignment violates split or reuse capacity");
  if (!(scenario.noise_power > 0.0)) throw DomainError("noise power must be positive");
  pair_index_.assign(K * M_, -1);
  pairs_of_group_.resize(K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M_; ++m)
      if (assignment(k, m)) {
        pair_index_[k * M_ + m] = static_cast<long>(pairs_.size());
        pairs_of_group_[k].push_back(pairs_.size());
        pairs_.emplace_back(k, m);
      }
  for (std::size_t m = 0; m < M_; ++m)
    if (!(scenario.max_power_cue[m] > 4.0 * kPowerFloor)) throw DomainError("CUE budget below the power floor");
  for (std::size_t k = 0; k < K; ++k)
    if (!pairs_of_group_[k].empty() &&
        !(scenario.max_power_group[k] > 4.0 * kPowerFloor * static_cast<double>(pairs_of_group_[k].size())))
      throw DomainError("group budget below the power floor");
}

SmoothFunction PowerSubproblem::receiver_minorant(std::size_t p, std::size_t r) const {
  const auto [k, m] = pairs_[p];
  const std::size_t i = sca_.rx(k, r, m);
  const double a = sca_.a_rx[i];
  const double h = gains_.direct(k, r, m);
  if (!(h > 0.0)) throw DomainError("direct link gain must be positive");
  SmoothFunction f;
  f.constant = a * std::log2(h) + sca_.b_rx[i];
  f.linear.emplace_back(q_pair(p), a);
  LogSumExp2Term den{-a, scenario_.noise_power, {}};
  const double beta = gains_.cue_to_receiver(m, k, r);
  if (beta > 0.0) den.terms.emplace_back(q_cue(m), beta);
  for (std::size_t j = 0; j < scenario_.num_groups(); ++j) {
    if (j == k) continue;
    const long pj = pair_index_[j * M_ + m];
    if (pj < 0) continue;
    const double g = gains_.tx_to_receiver(j, k, r, m);
    if (g > 0.0) den.terms.emplace_back(q_pair(static_cast<std::size_t>(pj)), g);
  }
  f.lse.push_back(std::move(den));
  return f;
}

SmoothFunction PowerSubproblem::cue_minorant(std::size_t m) const {
  const double a = sca_.a_cue[m];
  const double h = gains_.cue_to_bs(m);
  if (!(h > 0.0)) throw DomainError("CUE link gain must be positive");
  SmoothFunction f;
  f.constant = a * std::log2(h) + sca_.b_cue[m];
  f.linear.emplace_back(q_cue(m), a);
  LogSumExp2Term den{-a, scenario_.noise_power, {}};
  for (std::size_t k = 0; k < scenario_.num_groups(); ++k) {
    const long p = pair_index_[k * M_ + m];
    if (p < 0) continue;
    const double g = gains_.group_to_bs(k, m);
    if (g > 0.0) den.terms.emplace_back(q_pair(static_cast<std::size_t>(p)), g);
  }
  f.lse.push_back(std::move(den));
  return f;
}

void PowerSubproblem::set_anchors(const SCAParams& sca) {
  sca_ = sca;
  const std::size_t K = scenario_.num_groups();
  const std::size_t P = pairs_.size();
  const double q_floor = std::log2(kPowerFloor);
  hard_.clear();
  soft_.clear();
  family_f_.clear();
  family_g_.clear();
  minorants_.assign(P, {});
  cue_minorants_.clear();

  for (std::size_t m = 0; m < M_; ++m) cue_minorants_.push_back(cue_minorant(m));
  for (std::size_t p = 0; p < P; ++p) {
    const std::size_t k = pairs_[p].first;
    for (std::size_t r = 0; r < scenario_.num_receivers(k); ++r) {
      minorants_[p].push_back(receiver_minorant(p, r));
      SmoothFunction c;
      c.linear.emplace_back(t_pair(p), 1.0);
      c += -1.0 * minorants_[p].back();
      hard_.push_back(std::move(c));
    }
    SmoothFunction lo;
    lo.constant = kEpigraphFloor;
    lo.linear.emplace_back(t_pair(p), -1.0);
    hard_.push_back(std::move(lo));
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (pairs_of_group_[k].empty()) continue;
    SmoothFunction budget;
    budget.constant = -scenario_.max_power_group[k];
    for (auto p : pairs_of_group_[k]) budget.exp2.push_back({q_pair(p), 1.0});
    hard_.push_back(std::move(budget));
  }
  for (std::size_t m = 0; m < M_; ++m) {
    SmoothFunction cap;
    cap.constant = -std::log2(scenario_.max_power_cue[m]);
    cap.linear.emplace_back(q_cue(m), 1.0);
    hard_.push_back(std::move(cap));
  }
  for (std::size_t v = 0; v < M_ + P; ++v) {
    SmoothFunction fl;
    fl.constant = q_floor;
    fl.linear.emplace_back(v, -1.0);
    hard_.push_back(std::move(fl));
  }

  for (std::size_t m = 0; m < M_; ++m)
    if (scenario_.min_rate_cue[m] > 0.0) {
      SmoothFunction c = -1.0 * cue_minorants_[m];
      c.constant += scenario_.min_rate_cue[m];
      soft_.push_back(std::move(c));
    }
  for (std::size_t k = 0; k < K; ++k) {
    const double sk = static_cast<double>(scenario_.num_receivers(k));
    if (scenario_.min_rate_group[k] > 0.0) {
      SmoothFunction c;
      c.constant = scenario_.min_rate_group[k];
      for (auto p : pairs_of_group_[k]) c.linear.emplace_back(t_pair(p), -sk);
      soft_.push_back(std::move(c));
    }
    if (scenario_.min_rate_per_channel[k] > 0.0)
      for (auto p : pairs_of_group_[k]) {
        SmoothFunction c;
        c.constant = scenario_.min_rate_per_channel[k];
        c.linear.emplace_back(t_pair(p), -sk);
        soft_.push_back(std::move(c));
      }
  }

  auto group_rate = [&](std::size_t k, double weight) {
    SmoothFunction f;
    const double sk = static_cast<double>(scenario_.num_receivers(k));
    for (auto p : pairs_of_group_[k]) f.linear.emplace_back(t_pair(p), weight * sk);
    return f;
  };
  auto group_power = [&](std::size_t k) {
    SmoothFunction g;
    g.constant = group_circuit_power(scenario_, assignment_, k);
    for (auto p : pairs_of_group_[k]) g.exp2.push_back({q_pair(p), 1.0});
    return g;
  };
  auto cue_power = [&](std::size_t m) {
    SmoothFunction g;
    g.constant = scenario_.circuit_power_cue[m];
    g.exp2.push_back({q_cue(m), 1.0});
    return g;
  };
  if (objective_ == Objective::Gee) {
    SmoothFunction f, g;
    for (std::size_t m = 0; m < M_; ++m) {
      f += cue_minorants_[m];
      g += cue_power(m);
    }
    for (std::size_t k = 0; k < K; ++k) {
      f += group_rate(k, 1.0);
      g += group_power(k);
    }
    family_f_.push_back(std::move(f));
    family_g_.push_back(std::move(g));
  } else {
    for (std::size_t m = 0; m < M_; ++m) {
      family_f_.push_back(scenario_.weight_cue[m] * cue_minorants_[m]);
      family_g_.push_back(cue_power(m));
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (pairs_of_group_[k].empty()) continue;
      family_f_.push_back(group_rate(k, scenario_.weight_group[k]));
      family_g_.push_back(group_power(k));
    }
  }
}

ConvexProgram PowerSubproblem::phase_two(double lambda) const {
  ConvexProgram prog;
  prog.constraints = hard_;
  prog.constraints.insert(prog.constraints.end(), soft_.begin(), soft_.end());
  if (objective_ == Objective::Gee) {
    prog.num_vars = base_vars();
    prog.objective = family_f_[0] + (-lambda) * family_g_[0];
  } else {
    prog.num_vars = base_vars() + 1;
    prog.objective.linear.emplace_back(extra(), 1.0);
    for (std::size_t i = 0; i < family_f_.size(); ++i) {
      SmoothFunction c = (-1.0 * family_f_[i]) + lambda * family_g_[i];
      c.linear.emplace_back(extra(), 1.0);
      prog.constraints.push_back(std::move(c));
    }
  }
  return prog;
}

ConvexProgram PowerSubproblem::phase_one() const {
  ConvexProgram prog;
  prog.num_vars = base_vars() + 1;
  prog.objective.linear.emplace_back(extra(), -1.0);
  prog.constraints = hard_;
  for (auto c : soft_) {
    c.linear.emplace_back(extra(), -1.0);
    prog.constraints.push_back(std::move(c));
  }
  SmoothFunction lo;
  lo.constant = -1.0;
  lo.linear.emplace_back(extra(), -1.0);
  prog.constraints.push_back(std::move(lo));
  return prog;
}

Vec PowerSubproblem::encode(const PowerAllocation& powers) const {
  Vec x = Vec::Zero(static_cast<Eigen::Index>(base_vars()));
  for (std::size_t m = 0; m < M_; ++m) {
    const double p = std::clamp(powers.cue[m], 2.0 * kPowerFloor, kBudgetShrink * scenario_.max_power_cue[m]);
    x[static_cast<Eigen::Index>(q_cue(m))] = std::log2(p);
  }
  for (std::size_t k = 0; k < scenario_.num_groups(); ++k) {
    const auto& ps = pairs_of_group_[k];
    if (ps.empty()) continue;
    std::vector<double> v;
    for (auto p : ps) v.push_back(std::max(powers.grp(pairs_[p].first, pairs_[p].second), 2.0 * kPowerFloor));
    const double sum = std::accumulate(v.begin(), v.end(), 0.0);
    const double cap = kBudgetShrink * scenario_.max_power_group[k];
    if (sum > cap) {
      // shrink the part above the floor so every entry stays clear of it
      const double floor_part = 2.0 * kPowerFloor * static_cast<double>(v.size());
      const double scale = (cap - floor_part) / (sum - floor_part);
      for (double& e : v) e = 2.0 * kPowerFloor + (e - 2.0 * kPowerFloor) * scale;
    }
    for (std::size_t i = 0; i < ps.size(); ++i) x[static_cast<Eigen::Index>(q_pair(ps[i]))] = std::log2(v[i]);
  }
  return x;
}

PowerAllocation PowerSubproblem::powers(const Vec& x) const {
  PowerAllocation out(scenario_.num_groups(), M_);
  for (std::size_t m = 0; m < M_; ++m) out.cue[m] = std::exp2(x[static_cast<Eigen::Index>(q_cue(m))]);
  for (std::size_t p = 0; p < pairs_.size(); ++p)
    out.grp(pairs_[p].first, pairs_[p].second) = std::exp2(x[static_cast<Eigen::Index>(q_pair(p))]);
  return out;
}

double PowerSubproblem::max_soft_violation(const Vec& x) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : soft_) worst = std::max(worst, c.value(x));
  return worst;
}

void PowerSubproblem::tighten(Vec& x, double margin) const {
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& f : minorants_[p]) lo = std::min(lo, f.value(x));
    const auto i = static_cast<Eigen::Index>(t_pair(p));
    const double target = lo - margin * std::max(1.0, std::abs(lo));
    if (!(x[i] < lo) || x[i] < target) x[i] = target;
    x[i] = std::max(x[i], kEpigraphFloor + 1.0);
  }
}

std::vector<double> PowerSubproblem::numerators(const Vec& x) const {
  std::vector<double> out;
  for (const auto& f : family_f_) out.push_back(f.value(x));
  return out;
}

std::vector<double> PowerSubproblem::denominators(const Vec& x) const {
  std::vector<double> out;
  for (const auto& g : family_g_) out.push_back(g.value(x));
  return out;
}

Vec PowerSubproblem::lift(const Vec& x, double lambda) const {
  if (objective_ == Objective::Gee) return x;
  Vec y(x.size() + 1);
  y.head(x.size()) = x;
  double z = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < family_f_.size(); ++i)
    z = std::min(z, family_f_[i].value(x) - lambda * family_g_[i].value(x));
  y[x.size()] = z - std::max(1.0, std::abs(z)) * 1e-3;
  return y;
}

namespace {

struct RatioSummary {
  double F;
  double ratio;
};

RatioSummary summarize(const PowerSubproblem& sub, const Vec& x, double lambda) {
  const auto f = sub.numerators(x);
  const auto g = sub.denominators(x);
  double F = std::numeric_limits<double>::infinity();
  double ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(g[i] > 0.0)) throw NonPositiveDenominator("power denominator is not positive");
    F = std::min(F, f[i] - lambda * g[i]);
    ratio = std::min(ratio, f[i] / g[i]);
  }
  if (f.empty()) F = ratio = 0.0;
  return {F, ratio};
}

}  // namespace

InnerSolution solve_inner(const PowerSubproblem& sub, double lambda, const Vec& start) {
  const ConvexProgram prog = sub.phase_two(lambda);
  const Vec x0 = sub.lift(start, lambda);
  if (!strictly_feasible(prog, x0)) throw InnerSolverFailure("inner start point is not strictly feasible");
  const BarrierResult br = solve_barrier(prog, x0);
  InnerSolution out;
  out.x = br.x.head(static_cast<Eigen::Index>(sub.base_vars()));
  out.powers = sub.powers(out.x);
  const auto sum = summarize(sub, out.x, lambda);
  out.F = sum.F;
  out.ratio = sum.ratio;
  out.newton_steps = br.newton_steps;
  const Vec duals = active_duals(prog, br.x);
  const Vec lg = lagrangian_gradient(prog, br.x, duals);
  Vec g0 = Vec::Zero(static_cast<Eigen::Index>(prog.num_vars));
  prog.objective.add_gradient(br.x, 1.0, g0);
  out.kkt_residual = linf(lg) / (1.0 + linf(g0));
  return out;
}

namespace {

// Drives x to a strictly feasible point of the surrogate, re-anchoring between
// phase-one solves. Returns the number of phase-one solves used.
int restore(PowerSubproblem& sub, Vec& x, const Scenario& scenario, const GainTable& gains,
            const Assignment& assignment, const SolverConfig& config) {
  if (!sub.has_soft_constraints() || sub.max_soft_violation(x) < 0.0) return 0;
  double best = std::numeric_limits<double>::infinity();
  int stalls = 0;
  for (int round = 1; round <= config.inner_max_iter; ++round) {
    const ConvexProgram prog = sub.phase_one();
    Vec x1(x.size() + 1);
    x1.head(x.size()) = x;
    x1[x.size()] = std::max(sub.max_soft_violation(x), 0.0) + 1.0;
    BarrierOptions opts;
    opts.stop_var = sub.extra();
    opts.stop_below = kRestoreTarget;
    const BarrierResult br = solve_barrier(prog, x1, opts);
    x = br.x.head(x.size());
    const double s = br.x[x.size()];
    if (s < 0.0) return round;
    if (s < best - 1e-9 * std::max(1.0, std::abs(best))) {
      best = s;
      stalls = 0;
    } else if (++stalls >= 3) {
      break;
    }
    const PowerAllocation p = sub.powers(x);
    const OperatingPoint op{scenario, gains, assignment, p};
    sub.set_anchors(anchor_at(op));
    sub.tighten(x, kTightenMargin);
    if (sub.max_soft_violation(x) < 0.0) return round;
  }
  throw Infeasible("rate targets unreachable for assignment " + assignment.to_string());
}

void reanchor(PowerSubproblem& sub, Vec& x, const Scenario& scenario, const GainTable& gains,
              const Assignment& assignment) {
  const PowerAllocation p = sub.powers(x);
  const OperatingPoint op{scenario, gains, assignment, p};
  sub.set_anchors(anchor_at(op));
  sub.tighten(x, kTightenMargin);
}

}  // namespace

InnerSolution solve_inner(double lambda, const SCAParams& sca, const Assignment& assignment, const GainTable& gains,
                          const Scenario& scenario, Objective objective, const std::optional<PowerAllocation>& initial) {
  PowerSubproblem sub(scenario, gains, assignment, objective);
  sub.set_anchors(sca);
  Vec x = sub.encode(initial ? *initial : uniform_powers(scenario, assignment));
  sub.tighten(x, kTightenMargin);
  if (sub.has_soft_constraints() && !(sub.max_soft_violation(x) < 0.0)) {
    const ConvexProgram prog = sub.phase_one();
    Vec x1(x.size() + 1);
    x1.head(x.size()) = x;
    x1[x.size()] = std::max(sub.max_soft_violation(x), 0.0) + 1.0;
    BarrierOptions opts;
    opts.stop_var = sub.extra();
    opts.stop_below = kRestoreTarget;
    const BarrierResult br = solve_barrier(prog, x1, opts);
    if (!(br.x[x.size()] < 0.0)) throw Infeasible("surrogate constraint set is empty at these anchors");
    x = br.x.head(x.size());
  }
  return solve_inner(sub, lambda, x);
}

nlohmann::json to_json(const PowerDiagnostics& d) {
  return {{"sca_rounds", d.sca_rounds},
          {"dinkelbach_iterations", d.dinkelbach_iterations},
          {"restoration_rounds", d.restoration_rounds},
          {"newton_steps", d.newton_steps},
          {"kkt_residual", d.kkt_residual},
          {"converged", d.converged},
          {"lambda", d.lambda_trace},
          {"objective", d.objective_trace}};
}

PowerAllocation uniform_powers(const Scenario& scenario, const Assignment& assignment) {
  const std::size_t K = scenario.num_groups();
  const std::size_t M = scenario.num_channels();
  PowerAllocation p(K, M);
  p.cue = scenario.max_power_cue;
  for (std::size_t k = 0; k < K; ++k) {
    const int n = assignment.row_sum(k);
    if (n == 0) continue;
    for (std::size_t m = 0; m < M; ++m)
      if (assignment(k, m)) p.grp(k, m) = scenario.max_power_group[k] / n;
  }
  return p;
}

std::optional<std::string> corner_infeasibility(const Scenario& scenario, const GainTable& gains,
                                                const Assignment& assignment) {
  const double noise = scenario.noise_power;
  for (std::size_t m = 0; m < scenario.num_channels(); ++m) {
    const double best = std::log2(1.0 + scenario.max_power_cue[m] * gains.cue_to_bs(m) / noise);
    if (best < scenario.min_rate_cue[m]) return "CUE " + std::to_string(m) + " cannot reach its minimum rate";
  }
  for (std::size_t k = 0; k < scenario.num_groups(); ++k) {
    const double sk = static_cast<double>(scenario.num_receivers(k));
    double total = 0.0;
    for (std::size_t m = 0; m < scenario.num_channels(); ++m) {
      if (!assignment(k, m)) continue;
      double g = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < scenario.num_receivers(k); ++r) g = std::min(g, gains.direct(k, r, m));
      const double best = sk * std::log2(1.0 + scenario.max_power_group[k] * g / noise);
      if (best < scenario.min_rate_per_channel[k])
        return "group " + std::to_string(k) + " cannot reach its per-channel rate on channel " + std::to_string(m);
      total += best;
    }
    if (total < scenario.min_rate_group[k]) return "group " + std::to_string(k) + " cannot reach its minimum rate";
  }
  return std::nullopt;
}

double objective_value(const Metrics& m, Objective objective) {
  return objective == Objective::Gee ? m.gee : m.wee;
}

PowerResult optimize_power(const Assignment& assignment, const GainTable& gains, const Scenario& scenario,
                           Objective objective, const SolverConfig& config) {
  config.validate();
  PowerSubproblem sub(scenario, gains, assignment, objective);
  if (auto why = corner_infeasibility(scenario, gains, assignment)) throw Infeasible(*why);

  PowerResult res;
  PowerDiagnostics& diag = res.diagnostics;
  Vec x = sub.encode(uniform_powers(scenario, assignment));
  reanchor(sub, x, scenario, gains, assignment);
  diag.restoration_rounds = restore(sub, x, scenario, gains, assignment, config);

  auto true_objective = [&](const Vec& v) {
    const PowerAllocation p = sub.powers(v);
    return objective_value(metrics({scenario, gains, assignment, p}), objective);
  };

  double obj = true_objective(x);
  diag.objective_trace.push_back(obj);
  for (int it = 1; it <= config.sca_max_iter; ++it) {
    diag.sca_rounds = it;
    if (it > 1 || diag.restoration_rounds > 0) reanchor(sub, x, scenario, gains, assignment);
    const Vec before = x;
    double lambda = summarize(sub, x, 0.0).ratio;
    for (int d = 0; d < config.dinkelbach_max_iter; ++d) {
      const InnerSolution sol = solve_inner(sub, lambda, x);
      ++diag.dinkelbach_iterations;
      diag.newton_steps += sol.newton_steps;
      diag.lambda_trace.push_back(lambda);
      if (sol.ratio < lambda - 1e-12 * std::max(1.0, std::abs(lambda))) break;
      x = sol.x;
      diag.kkt_residual = std::max(diag.kkt_residual, sol.kkt_residual);
      if (sol.F <= config.dinkelbach_eps) break;
      lambda = sol.ratio;
    }
    const double next = true_objective(x);
    if (next < obj - 1e-9 * std::max(1.0, std::abs(obj))) {
      x = before;
      diag.converged = true;
      break;
    }
    diag.objective_trace.push_back(next);
    const double change = std::abs(next - obj) / std::max(std::abs(obj), 1e-300);
    obj = next;
    if (change < config.sca_rel_tol) {
      diag.converged = true;
      break;
    }
  }

  res.powers = floor_to_zero(sub.powers(x));
  const OperatingPoint op{scenario, gains, assignment, res.powers};
  res.metrics = metrics(op);
  res.objective = objective_value(res.metrics, objective);
  res.feasible = check_feasible(op).all();
  return res;
}

}  // namespace d2md
