#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace d2md {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientPoints : public Error {
 public:
  using Error::Error;
};
class ChannelNotAssigned : public Error {
 public:
  using Error::Error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};
class Infeasible : public Error {
 public:
  using Error::Error;
};
class InnerSolverFailure : public Error {
 public:
  using Error::Error;
};
class NonPositiveDenominator : public Error {
 public:
  using Error::Error;
};
class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(const Point& a, const Point& b);

/// One multicast cluster: a transmitting head and its receivers.
struct Group {
  Point head;
  std::vector<Point> receivers;
};

/// Full problem instance. Powers are in watts, rates in bit/s/Hz.
struct Scenario {
  double cell_radius = 500.0;
  std::vector<Group> groups;
  std::vector<Point> cue_positions;

  double noise_power = 0.0;
  std::vector<double> circuit_power_cue;    // tau_m, per CUE
  std::vector<double> circuit_power_group;  // tau'_k, per group (per used RB when s > 1)
  std::vector<double> max_power_cue;        // P^(m)
  std::vector<double> max_power_group;      // total budget over all RBs of group k
  std::vector<double> min_rate_cue;
  std::vector<double> min_rate_group;
  std::vector<double> min_rate_per_channel;  // per group, applied to every RB it uses
  std::vector<double> weight_cue;
  std::vector<double> weight_group;

  int split_factor = 1;  // s: max RBs per group
  int reuse_factor = 1;  // r: max groups per RB

  std::size_t num_channels() const { return cue_positions.size(); }
  std::size_t num_groups() const { return groups.size(); }
  std::size_t num_receivers(std::size_t k) const { return groups[k].receivers.size(); }

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

/// Linear link gains for one fading realization.
class GainTable {
 public:
  GainTable() = default;
  explicit GainTable(const Scenario& scenario);

  double& cue_to_bs(std::size_t m) { return cue_bs_[m]; }
  double cue_to_bs(std::size_t m) const { return cue_bs_[m]; }

  double& group_to_bs(std::size_t k, std::size_t m) { return grp_bs_[k * channels_ + m]; }
  double group_to_bs(std::size_t k, std::size_t m) const { return grp_bs_[k * channels_ + m]; }

  // Gain from the transmitter of group j to receiver r of group k on channel m.
  double& tx_to_receiver(std::size_t j, std::size_t k, std::size_t r, std::size_t m) {
    return tx_rx_[(rx_offset_[k] + r) * groups_ * channels_ + j * channels_ + m];
  }
  double tx_to_receiver(std::size_t j, std::size_t k, std::size_t r, std::size_t m) const {
    return tx_rx_[(rx_offset_[k] + r) * groups_ * channels_ + j * channels_ + m];
  }

  double& direct(std::size_t k, std::size_t r, std::size_t m) { return tx_to_receiver(k, k, r, m); }
  double direct(std::size_t k, std::size_t r, std::size_t m) const { return tx_to_receiver(k, k, r, m); }

  // Gain from CUE m to receiver r of group k (beta).
  double& cue_to_receiver(std::size_t m, std::size_t k, std::size_t r) {
    return beta_[(rx_offset_[k] + r) * channels_ + m];
  }
  double cue_to_receiver(std::size_t m, std::size_t k, std::size_t r) const {
    return beta_[(rx_offset_[k] + r) * channels_ + m];
  }

  std::size_t num_channels() const { return channels_; }
  std::size_t num_groups() const { return groups_; }
  std::size_t num_receivers(std::size_t k) const { return rx_offset_[k + 1] - rx_offset_[k]; }

  bool consistent_with(const Scenario& scenario) const;

  friend bool operator==(const GainTable&, const GainTable&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t groups_ = 0;
  std::vector<std::size_t> rx_offset_{0};
  std::vector<double> cue_bs_;
  std::vector<double> grp_bs_;
  std::vector<double> tx_rx_;
  std::vector<double> beta_;
};

/// Binary K x M channel allocation matrix.
class Assignment {
 public:
  Assignment() = default;
  Assignment(std::size_t groups, std::size_t channels)
      : groups_(groups), channels_(channels), cells_(groups * channels, 0) {}

  bool operator()(std::size_t k, std::size_t m) const { return cells_[k * channels_ + m] != 0; }
  void set(std::size_t k, std::size_t m, bool on) { cells_[k * channels_ + m] = on ? 1 : 0; }

  std::size_t num_groups() const { return groups_; }
  std::size_t num_channels() const { return channels_; }

  int row_sum(std::size_t k) const;
  int col_sum(std::size_t m) const;
  int total() const;
  std::vector<std::size_t> channels_of(std::size_t k) const;
  std::vector<std::size_t> groups_on(std::size_t m) const;

  bool respects(int split, int reuse) const;

  std::string to_string() const;

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::size_t groups_ = 0;
  std::size_t channels_ = 0;
  std::vector<unsigned char> cells_;
};

struct PowerAllocation {
  std::vector<double> cue;    // p^(m)
  std::vector<double> group;  // p_k^(m), row-major K x M
  std::size_t channels = 0;

  PowerAllocation() = default;
  PowerAllocation(std::size_t groups, std::size_t channels_)
      : cue(channels_, 0.0), group(groups * channels_, 0.0), channels(channels_) {}

  double& grp(std::size_t k, std::size_t m) { return group[k * channels + m]; }
  double grp(std::size_t k, std::size_t m) const { return group[k * channels + m]; }
  double group_total(std::size_t k) const;
  double total() const;

  friend bool operator==(const PowerAllocation&, const PowerAllocation&) = default;
};

inline double dbm_to_watt(double dbm) {
  return std::pow(10.0, (dbm - 30.0) / 10.0);
}
inline double watt_to_dbm(double watt) {
  return 10.0 * std::log10(watt) + 30.0;
}

}  // namespace d2md
