#pragma once

#include <string>
#include <vector>

#include "d2md/types.hpp"

namespace d2md {

/// Read-only view of one (assignment, powers) operating point.
struct OperatingPoint {
  const Scenario& scenario;
  const GainTable& gains;
  const Assignment& assignment;
  const PowerAllocation& powers;
};

double sinr_d2d(const OperatingPoint& op, std::size_t k, std::size_t rcv, std::size_t m);
double sinr_cue(const OperatingPoint& op, std::size_t m);

/// Weakest-receiver SINR of group k on channel m.
double min_sinr_d2d(const OperatingPoint& op, std::size_t k, std::size_t m);

double rate_cue(const OperatingPoint& op, std::size_t m);

/// Rate contributed by channel m alone: s_k * log2(1 + min_r SINR), zero if unassigned.
double rate_group_channel(const OperatingPoint& op, std::size_t k, std::size_t m);
double rate_group(const OperatingPoint& op, std::size_t k);

/// Worst-receiver aggregate interference on group k if it used channel m.
double interference_group(const OperatingPoint& op, std::size_t k, std::size_t m);
double interference_cue(const OperatingPoint& op, std::size_t m);

/// Circuit power charged to group k: once when s = 1, once per used RB when s > 1
/// (an idle transmitter still pays one unit).
double group_circuit_power(const Scenario& scenario, const Assignment& assignment, std::size_t k);
double total_circuit_power(const Scenario& scenario, const Assignment& assignment);

struct Metrics {
  std::vector<double> rate_cue;
  std::vector<double> rate_grp;
  std::vector<double> ee_cue;
  std::vector<double> ee_grp;
  double gee = 0.0;
  double wee = 0.0;
  double total_power = 0.0;     // transmit power only
  double circuit_power = 0.0;   // tau

  double aggregate_rate() const;
  double min_user_rate() const;
};

Metrics metrics(const OperatingPoint& op);

struct FeasibilityReport {
  bool power_budgets = true;     // group budgets and CUE budgets
  bool min_rates = true;         // CUE and group minimum rates
  bool per_channel_rates = true;
  bool split = true;
  bool reuse = true;
  bool nonnegative = true;
  std::vector<std::string> violations;

  bool all() const {
    return power_budgets && min_rates && per_channel_rates && split && reuse && nonnegative;
  }
};

/// Relative tolerance applied to every inequality.
inline constexpr double kFeasibilityTol = 1e-9;

FeasibilityReport check_feasible(const OperatingPoint& op);

}  // namespace d2md
