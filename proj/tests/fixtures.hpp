#pragma once

#include <random>

#include "d2md/types.hpp"

namespace d2md::test {

// Small hand-built scenario: every group has `receivers` receivers, noise 1 W,
// unit budgets and circuit powers, no rate targets. Gains start at zero.
inline Scenario tiny_scenario(std::size_t groups, std::size_t channels, std::size_t receivers = 1) {
  Scenario s;
  s.cell_radius = 100.0;
  for (std::size_t k = 0; k < groups; ++k) {
    Group g;
    g.head = {10.0 * static_cast<double>(k), 0.0};
    for (std::size_t r = 0; r < receivers; ++r) g.receivers.push_back({10.0 * static_cast<double>(k), 1.0 + r});
    s.groups.push_back(g);
  }
  for (std::size_t m = 0; m < channels; ++m) s.cue_positions.push_back({0.0, -10.0 * static_cast<double>(m + 1)});
  s.noise_power = 1.0;
  s.circuit_power_cue.assign(channels, 1.0);
  s.max_power_cue.assign(channels, 1.0);
  s.min_rate_cue.assign(channels, 0.0);
  s.weight_cue.assign(channels, 1.0);
  s.circuit_power_group.assign(groups, 1.0);
  s.max_power_group.assign(groups, 1.0);
  s.min_rate_group.assign(groups, 0.0);
  s.min_rate_per_channel.assign(groups, 0.0);
  s.weight_group.assign(groups, 1.0);
  return s;
}

// Random gains in [lo, hi] for every link; direct links are scaled by `direct`.
inline GainTable random_gains(const Scenario& s, std::mt19937_64& rng, double lo = 0.05, double hi = 1.0,
                              double direct = 10.0) {
  GainTable g(s);
  std::uniform_real_distribution<double> u(lo, hi);
  for (std::size_t m = 0; m < s.num_channels(); ++m) g.cue_to_bs(m) = direct * u(rng);
  for (std::size_t k = 0; k < s.num_groups(); ++k)
    for (std::size_t m = 0; m < s.num_channels(); ++m) g.group_to_bs(k, m) = u(rng);
  for (std::size_t k = 0; k < s.num_groups(); ++k)
    for (std::size_t r = 0; r < s.num_receivers(k); ++r) {
      for (std::size_t j = 0; j < s.num_groups(); ++j)
        for (std::size_t m = 0; m < s.num_channels(); ++m)
          g.tx_to_receiver(j, k, r, m) = (j == k ? direct : 1.0) * u(rng);
      for (std::size_t m = 0; m < s.num_channels(); ++m) g.cue_to_receiver(m, k, r) = u(rng);
    }
  return g;
}

}  // namespace d2md::test
