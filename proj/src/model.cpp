#include "d2md/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace d2md {

namespace {

double co_channel_interference(const OperatingPoint& op, std::size_t k, std::size_t rcv, std::size_t m) {
  double sum = op.powers.cue[m] * op.gains.cue_to_receiver(m, k, rcv);
  for (std::size_t j = 0; j < op.scenario.num_groups(); ++j) {
    if (j == k || !op.assignment(j, m)) continue;
    sum += op.powers.grp(j, m) * op.gains.tx_to_receiver(j, k, rcv, m);
  }
  return sum;
}

}  // namespace

double sinr_d2d(const OperatingPoint& op, std::size_t k, std::size_t rcv, std::size_t m) {
  if (!op.assignment(k, m))
    throw ChannelNotAssigned("group " + std::to_string(k) + " does not use channel " + std::to_string(m));
  const double signal = op.gains.direct(k, rcv, m) * op.powers.grp(k, m);
  if (signal == 0.0) return 0.0;
  return signal / (op.scenario.noise_power + co_channel_interference(op, k, rcv, m));
}

double sinr_cue(const OperatingPoint& op, std::size_t m) {
  const double signal = op.gains.cue_to_bs(m) * op.powers.cue[m];
  if (signal == 0.0) return 0.0;
  return signal / (op.scenario.noise_power + interference_cue(op, m));
}

double min_sinr_d2d(const OperatingPoint& op, std::size_t k, std::size_t m) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < op.scenario.num_receivers(k); ++r) worst = std::min(worst, sinr_d2d(op, k, r, m));
  return worst;
}

double rate_cue(const OperatingPoint& op, std::size_t m) {
  return std::log2(1.0 + sinr_cue(op, m));
}

double rate_group_channel(const OperatingPoint& op, std::size_t k, std::size_t m) {
  if (!op.assignment(k, m)) return 0.0;
  const auto receivers = static_cast<double>(op.scenario.num_receivers(k));
  return receivers * std::log2(1.0 + min_sinr_d2d(op, k, m));
}

double rate_group(const OperatingPoint& op, std::size_t k) {
  double rate = 0.0;
  for (std::size_t m = 0; m < op.scenario.num_channels(); ++m) rate += rate_group_channel(op, k, m);
  return rate;
}

double interference_group(const OperatingPoint& op, std::size_t k, std::size_t m) {
  double worst = 0.0;
  for (std::size_t r = 0; r < op.scenario.num_receivers(k); ++r)
    worst = std::max(worst, co_channel_interference(op, k, r, m));
  return worst;
}

double interference_cue(const OperatingPoint& op, std::size_t m) {
  double sum = 0.0;
  for (std::size_t k = 0; k < op.scenario.num_groups(); ++k)
    if (op.assignment(k, m)) sum += op.powers.grp(k, m) * op.gains.group_to_bs(k, m);
  return sum;
}

double group_circuit_power(const Scenario& scenario, const Assignment& assignment, std::size_t k) {
  const double tau = scenario.circuit_power_group[k];
  if (scenario.split_factor <= 1) return tau;
  return tau * std::max(1, assignment.row_sum(k));
}

double total_circuit_power(const Scenario& scenario, const Assignment& assignment) {
  double tau = std::accumulate(scenario.circuit_power_cue.begin(), scenario.circuit_power_cue.end(), 0.0);
  for (std::size_t k = 0; k < scenario.num_groups(); ++k) tau += group_circuit_power(scenario, assignment, k);
  return tau;
}

double Metrics::aggregate_rate() const {
  return std::accumulate(rate_cue.begin(), rate_cue.end(), 0.0) +
         std::accumulate(rate_grp.begin(), rate_grp.end(), 0.0);
}

double Metrics::min_user_rate() const {
  double lo = std::numeric_limits<double>::infinity();
  for (double r : rate_cue) lo = std::min(lo, r);
  for (double r : rate_grp) lo = std::min(lo, r);
  return std::isfinite(lo) ? lo : 0.0;
}

Metrics metrics(const OperatingPoint& op) {
  const Scenario& s = op.scenario;
  const std::size_t M = s.num_channels();
  const std::size_t K = s.num_groups();
  Metrics out;
  out.rate_cue.resize(M);
  out.ee_cue.resize(M);
  out.rate_grp.resize(K);
  out.ee_grp.resize(K);
  double wee = std::numeric_limits<double>::infinity();
  double transmit = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    out.rate_cue[m] = rate_cue(op, m);
    out.ee_cue[m] = out.rate_cue[m] / (s.circuit_power_cue[m] + op.powers.cue[m]);
    wee = std::min(wee, s.weight_cue[m] * out.ee_cue[m]);
    transmit += op.powers.cue[m];
  }
  for (std::size_t k = 0; k < K; ++k) {
    double used = 0.0;
    for (std::size_t m = 0; m < M; ++m)
      if (op.assignment(k, m)) used += op.powers.grp(k, m);
    out.rate_grp[k] = rate_group(op, k);
    out.ee_grp[k] = out.rate_grp[k] / (group_circuit_power(s, op.assignment, k) + used);
    wee = std::min(wee, s.weight_group[k] * out.ee_grp[k]);
    transmit += used;
  }
  out.total_power = transmit;
  out.circuit_power = total_circuit_power(s, op.assignment);
  out.gee = out.aggregate_rate() / (out.circuit_power + transmit);
  out.wee = std::isfinite(wee) ? wee : 0.0;
  return out;
}

namespace {

bool leq(double lhs, double rhs) {
  return lhs <= rhs + kFeasibilityTol * std::max(1.0, std::abs(rhs));
}

}  // namespace

FeasibilityReport check_feasible(const OperatingPoint& op) {
  const Scenario& s = op.scenario;
  const std::size_t M = s.num_channels();
  const std::size_t K = s.num_groups();
  FeasibilityReport rep;
  auto fail = [&](bool& family, const std::string& what) {
    family = false;
    rep.violations.push_back(what);
  };

  for (double p : op.powers.cue)
    if (!std::isfinite(p) || p < 0.0) fail(rep.nonnegative, "negative or non-finite CUE power");
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M; ++m) {
      const double p = op.powers.grp(k, m);
      if (!std::isfinite(p) || p < 0.0) fail(rep.nonnegative, "negative or non-finite group power");
      if (!op.assignment(k, m) && p != 0.0)
        fail(rep.nonnegative, "group " + std::to_string(k) + " transmits on unassigned channel " + std::to_string(m));
    }

  for (std::size_t k = 0; k < K; ++k)
    if (!leq(op.powers.group_total(k), s.max_power_group[k]))
      fail(rep.power_budgets, "group " + std::to_string(k) + " exceeds its power budget");
  for (std::size_t m = 0; m < M; ++m)
    if (!leq(op.powers.cue[m], s.max_power_cue[m]))
      fail(rep.power_budgets, "CUE " + std::to_string(m) + " exceeds its power budget");

  for (std::size_t k = 0; k < K; ++k)
    if (op.assignment.row_sum(k) > s.split_factor) fail(rep.split, "group " + std::to_string(k) + " exceeds split factor");
  for (std::size_t m = 0; m < M; ++m)
    if (op.assignment.col_sum(m) > s.reuse_factor) fail(rep.reuse, "channel " + std::to_string(m) + " exceeds reuse factor");

  if (rep.nonnegative) {
    for (std::size_t m = 0; m < M; ++m)
      if (!leq(s.min_rate_cue[m], rate_cue(op, m))) fail(rep.min_rates, "CUE " + std::to_string(m) + " below minimum rate");
    for (std::size_t k = 0; k < K; ++k) {
      if (!leq(s.min_rate_group[k], rate_group(op, k)))
        fail(rep.min_rates, "group " + std::to_string(k) + " below minimum rate");
      for (std::size_t m = 0; m < M; ++m)
        if (op.assignment(k, m) && !leq(s.min_rate_per_channel[k], rate_group_channel(op, k, m)))
          fail(rep.per_channel_rates,
               "group " + std::to_string(k) + " below per-channel minimum rate on channel " + std::to_string(m));
    }
  } else {
    rep.min_rates = rep.per_channel_rates = false;
  }
  return rep;
}

}  // namespace d2md
