#include <doctest.h>

#include <cmath>
#include <random>

#include "d2md/model.hpp"
#include "fixtures.hpp"

using namespace d2md;
using d2md::test::random_gains;
using d2md::test::tiny_scenario;

TEST_CASE("sinr_d2d: lone link") {
  Scenario s = tiny_scenario(1, 1);
  GainTable g(s);
  g.direct(0, 0, 0) = 1.0;
  Assignment a(1, 1);
  a.set(0, 0, true);
  PowerAllocation p(1, 1);
  p.grp(0, 0) = 1.0;
  const OperatingPoint op{s, g, a, p};
  CHECK(sinr_d2d(op, 0, 0, 0) == doctest::Approx(1.0));
}

TEST_CASE("sinr_d2d: CUE and co-channel interference") {
  Scenario s = tiny_scenario(2, 1);
  s.noise_power = 0.5;
  GainTable g(s);
  g.direct(0, 0, 0) = 4.0;
  g.cue_to_receiver(0, 0, 0) = 0.5;
  g.tx_to_receiver(1, 0, 0, 0) = 1.0;
  Assignment a(2, 1);
  a.set(0, 0, true);
  a.set(1, 0, true);
  PowerAllocation p(2, 1);
  p.cue[0] = 1.0;
  p.grp(0, 0) = 1.0;
  p.grp(1, 0) = 1.0;
  const OperatingPoint op{s, g, a, p};
  CHECK(sinr_d2d(op, 0, 0, 0) == doctest::Approx(2.0));
}

TEST_CASE("sinr_d2d: scale invariance without noise") {
  std::mt19937_64 rng(3);
  Scenario s = tiny_scenario(3, 2, 2);
  s.noise_power = 0.0;
  const GainTable g = random_gains(s, rng);
  Assignment a(3, 2);
  a.set(0, 0, true);
  a.set(1, 0, true);
  a.set(2, 1, true);
  PowerAllocation p(3, 2);
  p.cue = {0.3, 0.7};
  p.grp(0, 0) = 0.2;
  p.grp(1, 0) = 0.4;
  p.grp(2, 1) = 0.9;
  PowerAllocation q = p;
  for (double& v : q.cue) v *= 2.0;
  for (double& v : q.group) v *= 2.0;
  const OperatingPoint op{s, g, a, p};
  const OperatingPoint oq{s, g, a, q};
  for (std::size_t r = 0; r < 2; ++r) CHECK(sinr_d2d(op, 0, r, 0) == doctest::Approx(sinr_d2d(oq, 0, r, 0)));
}

TEST_CASE("sinr_d2d: unassigned channel") {
  Scenario s = tiny_scenario(1, 2);
  GainTable g(s);
  Assignment a(1, 2);
  a.set(0, 0, true);
  PowerAllocation p(1, 2);
  const OperatingPoint op{s, g, a, p};
  CHECK_THROWS_AS(sinr_d2d(op, 0, 0, 1), ChannelNotAssigned);
}

TEST_CASE("sinr_cue") {
  Scenario s = tiny_scenario(1, 1);
  GainTable g(s);
  g.cue_to_bs(0) = 1.0;
  g.group_to_bs(0, 0) = 1.5;
  Assignment a(1, 1);
  PowerAllocation p(1, 1);
  p.cue[0] = 2.0;
  p.grp(0, 0) = 0.0;
  {
    const OperatingPoint op{s, g, a, p};
    CHECK(sinr_cue(op, 0) == doctest::Approx(2.0));
  }
  a.set(0, 0, true);
  p.grp(0, 0) = 2.0;
  g.cue_to_bs(0) = 4.0;
  {
    const OperatingPoint op{s, g, a, p};
    CHECK(sinr_cue(op, 0) == doctest::Approx(2.0));
  }
  p.cue[0] = 0.0;
  {
    const OperatingPoint op{s, g, a, p};
    CHECK(sinr_cue(op, 0) == 0.0);
    CHECK(rate_cue(op, 0) == 0.0);
  }
}

TEST_CASE("rate_cue from SINR") {
  Scenario s = tiny_scenario(0, 1);
  GainTable g(s);
  Assignment a(0, 1);
  PowerAllocation p(0, 1);
  p.cue[0] = 1.0;
  g.cue_to_bs(0) = 1.0;
  {
    const OperatingPoint op{s, g, a, p};
    CHECK(rate_cue(op, 0) == doctest::Approx(1.0));
  }
  g.cue_to_bs(0) = 3.0;
  {
    const OperatingPoint op{s, g, a, p};
    CHECK(rate_cue(op, 0) == doctest::Approx(2.0));
  }
}

TEST_CASE("rate_group over channels and receivers") {
  Scenario s = tiny_scenario(1, 2, 3);
  GainTable g(s);
  // receiver SINRs on channel 0: 1, 2, 5 -> min 1; channel 1: 3, 4, 6 -> min 3
  const double sinr0[3] = {1.0, 2.0, 5.0};
  const double sinr1[3] = {3.0, 4.0, 6.0};
  for (std::size_t r = 0; r < 3; ++r) {
    g.direct(0, r, 0) = sinr0[r];
    g.direct(0, r, 1) = sinr1[r];
  }
  Assignment a(1, 2);
  a.set(0, 0, true);
  a.set(0, 1, true);
  PowerAllocation p(1, 2);
  p.grp(0, 0) = 1.0;
  p.grp(0, 1) = 1.0;
  const OperatingPoint op{s, g, a, p};
  CHECK(min_sinr_d2d(op, 0, 0) == doctest::Approx(1.0));
  CHECK(rate_group(op, 0) == doctest::Approx(9.0));
  CHECK(rate_group_channel(op, 0, 1) == doctest::Approx(6.0));

  Assignment none(1, 2);
  PowerAllocation zero(1, 2);
  const OperatingPoint on{s, g, none, zero};
  CHECK(rate_group(on, 0) == 0.0);
}

TEST_CASE("rate_group: unicast single channel is log2(1 + SINR)") {
  Scenario s = tiny_scenario(1, 1);
  GainTable g(s);
  g.direct(0, 0, 0) = 1.0;
  Assignment a(1, 1);
  a.set(0, 0, true);
  PowerAllocation p(1, 1);
  p.grp(0, 0) = 1.0;
  const OperatingPoint op{s, g, a, p};
  CHECK(rate_group(op, 0) == doctest::Approx(1.0));
}

TEST_CASE("interference_group takes the worst receiver") {
  Scenario s = tiny_scenario(2, 1, 2);
  GainTable g(s);
  g.cue_to_receiver(0, 0, 0) = 0.1;
  g.cue_to_receiver(0, 0, 1) = 0.3;
  g.tx_to_receiver(1, 0, 0, 0) = 0.1;
  g.tx_to_receiver(1, 0, 1, 0) = 0.2;
  Assignment a(2, 1);
  PowerAllocation p(2, 1);
  p.cue[0] = 1.0;
  p.grp(1, 0) = 1.0;
  {
    const OperatingPoint op{s, g, a, p};
    // group 1 not on the channel: only the CUE counts
    CHECK(interference_group(op, 0, 0) == doctest::Approx(0.3));
  }
  a.set(1, 0, true);
  {
    const OperatingPoint op{s, g, a, p};
    // receivers see 0.2 and 0.5
    CHECK(interference_group(op, 0, 0) == doctest::Approx(0.5));
  }
  p.cue[0] = 0.0;
  p.grp(1, 0) = 0.0;
  {
    const OperatingPoint op{s, g, a, p};
    CHECK(interference_group(op, 0, 0) == 0.0);
  }
}

TEST_CASE("interference_cue sums assigned groups only") {
  Scenario s = tiny_scenario(3, 2);
  GainTable g(s);
  g.group_to_bs(0, 0) = 0.1;
  g.group_to_bs(1, 0) = 0.2;
  g.group_to_bs(2, 0) = 5.0;
  Assignment a(3, 2);
  PowerAllocation p(3, 2);
  for (std::size_t k = 0; k < 3; ++k) p.grp(k, 0) = 1.0;
  {
    const OperatingPoint op{s, g, a, p};
    CHECK(interference_cue(op, 0) == 0.0);
  }
  a.set(0, 0, true);
  a.set(1, 0, true);
  a.set(2, 1, true);
  const OperatingPoint op{s, g, a, p};
  CHECK(interference_cue(op, 0) == doctest::Approx(0.3));
}

TEST_CASE("circuit power accounting follows the split factor") {
  Scenario s = tiny_scenario(2, 3);
  s.circuit_power_group = {0.5, 0.5};
  Assignment a(2, 3);
  a.set(0, 0, true);
  a.set(0, 1, true);
  CHECK(group_circuit_power(s, a, 0) == doctest::Approx(0.5));
  s.split_factor = 2;
  CHECK(group_circuit_power(s, a, 0) == doctest::Approx(1.0));
  CHECK(group_circuit_power(s, a, 1) == doctest::Approx(0.5));
  CHECK(total_circuit_power(s, a) == doctest::Approx(3.0 + 1.5));
}

TEST_CASE("metrics: zero powers") {
  Scenario s = tiny_scenario(2, 2);
  std::mt19937_64 rng(1);
  const GainTable g = random_gains(s, rng);
  Assignment a(2, 2);
  a.set(0, 0, true);
  PowerAllocation p(2, 2);
  const Metrics mt = metrics({s, g, a, p});
  CHECK(mt.gee == 0.0);
  CHECK(mt.wee == 0.0);
  CHECK(mt.aggregate_rate() == 0.0);
}

TEST_CASE("metrics: single user WEE equals its EE") {
  Scenario s = tiny_scenario(0, 1);
  GainTable g(s);
  g.cue_to_bs(0) = 3.0;
  Assignment a(0, 1);
  PowerAllocation p(0, 1);
  p.cue[0] = 1.0;
  const Metrics mt = metrics({s, g, a, p});
  CHECK(mt.ee_cue[0] == doctest::Approx(1.0));
  CHECK(mt.wee == doctest::Approx(mt.ee_cue[0]));
  CHECK(mt.gee == doctest::Approx(1.0));
}

TEST_CASE("metrics: recomputation identity and WEE bound on random points") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Scenario s = tiny_scenario(3, 3, 2);
    s.split_factor = trial % 2 + 1;
    s.weight_cue = {1.0, 2.0, 0.5};
    s.weight_group = {1.5, 1.0, 0.7};
    const GainTable g = random_gains(s, rng);
    Assignment a(3, 3);
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t m = 0; m < 3; ++m)
        if (u(rng) < 0.4) a.set(k, m, true);
    PowerAllocation p(3, 3);
    for (auto& v : p.cue) v = u(rng);
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t m = 0; m < 3; ++m)
        if (a(k, m)) p.grp(k, m) = u(rng);
    const OperatingPoint op{s, g, a, p};
    const Metrics mt = metrics(op);
    double rates = 0.0;
    for (std::size_t m = 0; m < 3; ++m) rates += rate_cue(op, m);
    for (std::size_t k = 0; k < 3; ++k) rates += rate_group(op, k);
    const double denom = total_circuit_power(s, a) + p.total();
    CHECK(mt.gee == doctest::Approx(rates / denom).epsilon(1e-12));
    for (std::size_t m = 0; m < 3; ++m) CHECK(mt.wee <= s.weight_cue[m] * mt.ee_cue[m] + 1e-15);
    for (std::size_t k = 0; k < 3; ++k) CHECK(mt.wee <= s.weight_group[k] * mt.ee_grp[k] + 1e-15);
    CHECK(mt.gee >= 0.0);
  }
}

TEST_CASE("sinr_d2d is increasing in own power and non-increasing in interferers") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Scenario s = tiny_scenario(2, 1, 2);
    const GainTable g = random_gains(s, rng);
    Assignment a(2, 1);
    a.set(0, 0, true);
    a.set(1, 0, true);
    PowerAllocation p(2, 1);
    p.cue[0] = u(rng);
    p.grp(0, 0) = u(rng);
    p.grp(1, 0) = u(rng);
    const double base = sinr_d2d({s, g, a, p}, 0, 1, 0);
    PowerAllocation up = p;
    up.grp(0, 0) *= 1.5;
    CHECK(sinr_d2d({s, g, a, up}, 0, 1, 0) > base);
    PowerAllocation noisy = p;
    noisy.grp(1, 0) *= 1.5;
    noisy.cue[0] *= 1.5;
    CHECK(sinr_d2d({s, g, a, noisy}, 0, 1, 0) <= base);
  }
}

TEST_CASE("check_feasible families") {
  Scenario s = tiny_scenario(2, 2);
  s.min_rate_cue = {0.1, 0.1};
  s.min_rate_group = {0.1, 0.1};
  std::mt19937_64 rng(2);
  const GainTable g = random_gains(s, rng);
  Assignment a(2, 2);
  a.set(0, 0, true);
  a.set(1, 1, true);

  PowerAllocation zero(2, 2);
  auto rep = check_feasible({s, g, a, zero});
  CHECK_FALSE(rep.min_rates);
  CHECK(rep.power_budgets);

  Assignment crowded(2, 2);
  crowded.set(0, 0, true);
  crowded.set(1, 0, true);
  PowerAllocation p(2, 2);
  rep = check_feasible({s, g, crowded, p});
  CHECK_FALSE(rep.reuse);

  Assignment split(2, 2);
  split.set(0, 0, true);
  split.set(0, 1, true);
  rep = check_feasible({s, g, split, p});
  CHECK_FALSE(rep.split);

  PowerAllocation over(2, 2);
  over.cue = {2.0, 0.5};
  over.grp(0, 0) = 0.5;
  over.grp(1, 1) = 0.5;
  rep = check_feasible({s, g, a, over});
  CHECK_FALSE(rep.power_budgets);

  PowerAllocation stray(2, 2);
  stray.grp(0, 1) = 0.1;
  rep = check_feasible({s, g, a, stray});
  CHECK_FALSE(rep.nonnegative);
}

TEST_CASE("check_feasible: generous hand-built instance passes") {
  Scenario s = tiny_scenario(1, 1);
  s.max_power_cue = {10.0};
  s.max_power_group = {10.0};
  s.min_rate_cue = {0.5};
  s.min_rate_group = {0.5};
  s.min_rate_per_channel = {0.5};
  GainTable g(s);
  g.cue_to_bs(0) = 10.0;
  g.direct(0, 0, 0) = 10.0;
  g.group_to_bs(0, 0) = 0.1;
  g.cue_to_receiver(0, 0, 0) = 0.1;
  Assignment a(1, 1);
  a.set(0, 0, true);
  PowerAllocation p(1, 1);
  p.cue[0] = 1.0;
  p.grp(0, 0) = 1.0;
  const auto rep = check_feasible({s, g, a, p});
  CHECK(rep.all());
  CHECK(rep.violations.empty());
}

TEST_CASE("check_feasible: per-channel target") {
  Scenario s = tiny_scenario(1, 2);
  s.split_factor = 2;
  s.min_rate_per_channel = {0.5};
  GainTable g(s);
  g.direct(0, 0, 0) = 10.0;
  g.direct(0, 0, 1) = 0.01;
  Assignment a(1, 2);
  a.set(0, 0, true);
  a.set(0, 1, true);
  PowerAllocation p(1, 2);
  p.grp(0, 0) = 0.5;
  p.grp(0, 1) = 0.5;
  const auto rep = check_feasible({s, g, a, p});
  CHECK_FALSE(rep.per_channel_rates);
  CHECK(rep.min_rates);
}
