#include "d2md/types.hpp"

#include <numeric>
#include <sstream>

namespace d2md {

double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid scenario: " + what);
}

void require_size(const std::vector<double>& v, std::size_t n, const char* name) {
  require(v.size() == n, std::string(name) + " has " + std::to_string(v.size()) +
                             " entries, expected " + std::to_string(n));
  for (double x : v) require(std::isfinite(x) && x >= 0.0, std::string(name) + " must be finite and >= 0");
}

}  // namespace

void Scenario::validate() const {
  const std::size_t K = num_groups();
  const std::size_t M = num_channels();
  require(M >= 1, "at least one channel is required");
  require(split_factor >= 1 && reuse_factor >= 1, "split and reuse factors must be >= 1");
  require(cell_radius > 0.0, "cell radius must be positive");
  require(std::isfinite(noise_power) && noise_power >= 0.0, "noise power must be >= 0");
  const double slack = 1e-9 * cell_radius;
  const Point origin{};
  for (std::size_t k = 0; k < K; ++k) {
    require(!groups[k].receivers.empty(), "group " + std::to_string(k) + " has no receivers");
    require(distance(groups[k].head, origin) <= cell_radius + slack, "group head outside the cell");
    for (const auto& p : groups[k].receivers)
      require(distance(p, origin) <= cell_radius + slack, "receiver outside the cell");
  }
  for (const auto& p : cue_positions) require(distance(p, origin) <= cell_radius + slack, "CUE outside the cell");
  require_size(circuit_power_cue, M, "circuit_power_cue");
  require_size(max_power_cue, M, "max_power_cue");
  require_size(min_rate_cue, M, "min_rate_cue");
  require_size(weight_cue, M, "weight_cue");
  require_size(circuit_power_group, K, "circuit_power_group");
  require_size(max_power_group, K, "max_power_group");
  require_size(min_rate_group, K, "min_rate_group");
  require_size(min_rate_per_channel, K, "min_rate_per_channel");
  require_size(weight_group, K, "weight_group");
}

GainTable::GainTable(const Scenario& scenario)
    : channels_(scenario.num_channels()), groups_(scenario.num_groups()) {
  rx_offset_.assign(groups_ + 1, 0);
  for (std::size_t k = 0; k < groups_; ++k) rx_offset_[k + 1] = rx_offset_[k] + scenario.num_receivers(k);
  const std::size_t receivers = rx_offset_.back();
  cue_bs_.assign(channels_, 0.0);
  grp_bs_.assign(groups_ * channels_, 0.0);
  tx_rx_.assign(receivers * groups_ * channels_, 0.0);
  beta_.assign(receivers * channels_, 0.0);
}

bool GainTable::consistent_with(const Scenario& scenario) const {
  if (channels_ != scenario.num_channels() || groups_ != scenario.num_groups()) return false;
  for (std::size_t k = 0; k < groups_; ++k)
    if (num_receivers(k) != scenario.num_receivers(k)) return false;
  auto ok = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x) || x < 0.0) return false;
    return true;
  };
  return ok(cue_bs_) && ok(grp_bs_) && ok(tx_rx_) && ok(beta_);
}

int Assignment::row_sum(std::size_t k) const {
  int n = 0;
  for (std::size_t m = 0; m < channels_; ++m) n += (*this)(k, m) ? 1 : 0;
  return n;
}

int Assignment::col_sum(std::size_t m) const {
  int n = 0;
  for (std::size_t k = 0; k < groups_; ++k) n += (*this)(k, m) ? 1 : 0;
  return n;
}

int Assignment::total() const {
  return static_cast<int>(std::accumulate(cells_.begin(), cells_.end(), 0));
}

std::vector<std::size_t> Assignment::channels_of(std::size_t k) const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < channels_; ++m)
    if ((*this)(k, m)) out.push_back(m);
  return out;
}

std::vector<std::size_t> Assignment::groups_on(std::size_t m) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < groups_; ++k)
    if ((*this)(k, m)) out.push_back(k);
  return out;
}

bool Assignment::respects(int split, int reuse) const {
  for (std::size_t k = 0; k < groups_; ++k)
    if (row_sum(k) > split) return false;
  for (std::size_t m = 0; m < channels_; ++m)
    if (col_sum(m) > reuse) return false;
  return true;
}

std::string Assignment::to_string() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (std::size_t k = 0; k < groups_; ++k) {
    auto ch = channels_of(k);
    if (ch.empty()) continue;
    if (!first) os << ", ";
    first = false;
    os << "(g" << k + 1;
    for (auto m : ch) os << ",m" << m + 1;
    os << ')';
  }
  os << '}';
  return os.str();
}

double PowerAllocation::group_total(std::size_t k) const {
  double s = 0.0;
  for (std::size_t m = 0; m < channels; ++m) s += grp(k, m);
  return s;
}

double PowerAllocation::total() const {
  return std::accumulate(cue.begin(), cue.end(), 0.0) + std::accumulate(group.begin(), group.end(), 0.0);
}

}  // namespace d2md
