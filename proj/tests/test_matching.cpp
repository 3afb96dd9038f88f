#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "d2md/matching.hpp"
#include "d2md/scenario.hpp"
#include "fixtures.hpp"

using namespace d2md;

namespace {

// Four groups, four channels (0-based).
PreferenceLists four_by_four() {
  PreferenceLists p;
  p.group = {{3, 0, 2, 1}, {3, 0, 1, 2}, {3, 1, 0, 2}, {3, 1, 0, 2}};
  p.channel = {{2, 3, 1, 0}, {3, 2, 0, 1}, {3, 2, 0, 1}, {2, 3, 1, 0}};
  return p;
}

// Four groups, two channels.
PreferenceLists four_by_two() {
  PreferenceLists p;
  p.group = {{1, 0}, {1, 0}, {0, 1}, {0, 1}};
  p.channel = {{2, 0, 1, 3}, {3, 2, 0, 1}};
  return p;
}

Assignment pairs(std::size_t K, std::size_t M, std::initializer_list<std::pair<std::size_t, std::size_t>> cells) {
  Assignment a(K, M);
  for (auto [k, m] : cells) a.set(k, m, true);
  return a;
}

PreferenceLists random_profile(std::size_t K, std::size_t M, std::mt19937_64& rng) {
  PreferenceLists p;
  p.group.resize(K);
  p.channel.resize(M);
  for (auto& l : p.group) {
    l.resize(M);
    std::iota(l.begin(), l.end(), 0);
    std::shuffle(l.begin(), l.end(), rng);
  }
  for (auto& l : p.channel) {
    l.resize(K);
    std::iota(l.begin(), l.end(), 0);
    std::shuffle(l.begin(), l.end(), rng);
  }
  return p;
}

}  // namespace

TEST_CASE("one-to-one walkthrough outcome") {
  const Assignment a = match_one_to_one(four_by_four());
  CHECK(a == pairs(4, 4, {{0, 2}, {1, 0}, {2, 3}, {3, 1}}));
  CHECK(is_stable(a, four_by_four(), 1, 1).stable);
}

TEST_CASE("one-to-one: swapping two partners creates a blocking pair") {
  const Assignment swapped = pairs(4, 4, {{0, 3}, {1, 0}, {2, 2}, {3, 1}});
  const auto rep = is_stable(swapped, four_by_four(), 1, 1);
  CHECK_FALSE(rep.stable);
  REQUIRE(rep.blocking_pair.has_value());
  const auto [k, m] = *rep.blocking_pair;
  CHECK_FALSE(swapped(k, m));
}

TEST_CASE("empty assignment is never stable while both sides have room") {
  const auto rep = is_stable(Assignment(4, 4), four_by_four(), 1, 1);
  CHECK_FALSE(rep.stable);
  CHECK(rep.blocking_pair.has_value());
}

TEST_CASE("one-to-one: single pair") {
  PreferenceLists p;
  p.group = {{0}};
  p.channel = {{0}};
  CHECK(match_one_to_one(p) == pairs(1, 1, {{0, 0}}));
}

TEST_CASE("one-to-one: more groups than channels leaves groups unmatched") {
  std::mt19937_64 rng(4);
  const auto p = random_profile(6, 3, rng);
  const Assignment a = match_one_to_one(p);
  CHECK(a.total() == 3);
  CHECK(a.respects(1, 1));
  CHECK(is_stable(a, p, 1, 1).stable);
}

TEST_CASE("many-to-one walkthrough: round one and final round") {
  MatchTrace trace;
  const MatchResult r = match_rounds(four_by_two(), 2, 1, {}, &trace);
  REQUIRE(trace.rounds.size() == 2);
  CHECK(trace.rounds[0].capacity == 1);
  CHECK(trace.rounds[0].outcome == pairs(4, 2, {{2, 0}, {3, 1}}));
  CHECK(r.assignment.total() == 4);
  CHECK(r.assignment.col_sum(0) == 2);
  CHECK(r.assignment.col_sum(1) == 2);
  for (std::size_t k = 0; k < 4; ++k) CHECK(r.assignment.row_sum(k) == 1);
  CHECK(is_stable(r.assignment, r.final_prefs, 2, 1).stable);
}

TEST_CASE("many-to-many walkthrough: round one") {
  MatchTrace trace;
  const MatchResult r = match_rounds(four_by_four(), 2, 2, {}, &trace);
  REQUIRE(trace.rounds.size() == 2);
  CHECK(trace.rounds[0].outcome == pairs(4, 4, {{0, 2}, {2, 3}, {3, 1}, {3, 0}}));
  CHECK(r.assignment.respects(2, 2));
  CHECK(is_stable(r.assignment, r.final_prefs, 2, 2).stable);
}

TEST_CASE("reuse 1 reduces to one-to-one") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_profile(5, 5, rng);
    CHECK(match_rounds(p, 1, 1).assignment == match_one_to_one(p));
  }
}

TEST_CASE("deferred acceptance is group-optimal on a known profile") {
  // both groups rank channel 0 first; channel 0 prefers group 1
  PreferenceLists p;
  p.group = {{0, 1}, {0, 1}};
  p.channel = {{1, 0}, {0, 1}};
  CHECK(match_one_to_one(p) == pairs(2, 2, {{0, 1}, {1, 0}}));
}

TEST_CASE("matchers are stable, capacity-safe and deterministic on random profiles") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(1, 10);
  std::uniform_int_distribution<int> cap(1, 3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto K = static_cast<std::size_t>(size(rng));
    const auto M = static_cast<std::size_t>(size(rng));
    const int reuse = cap(rng);
    const int split = cap(rng);
    const auto p = random_profile(K, M, rng);
    const MatchResult r = match_rounds(p, reuse, split);
    CHECK(r.assignment.respects(split, reuse));
    CHECK(is_stable(r.assignment, r.final_prefs, reuse, split).stable);
    CHECK(r.proposals <= reuse * static_cast<int>(K * M));
    CHECK(match_rounds(p, reuse, split).assignment == r.assignment);
  }
}

TEST_CASE("stability holds against the final preferences when they change between rounds") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_profile(6, 4, rng);
    std::mt19937_64 upd(static_cast<std::uint64_t>(trial));
    PreferenceUpdate update = [&](const Assignment&) { return random_profile(6, 4, upd); };
    const MatchResult r = match_rounds(p, 3, 2, update);
    CHECK(r.assignment.respects(2, 3));
    CHECK(is_stable(r.assignment, r.final_prefs, 3, 2).stable);
  }
}

TEST_CASE("preference validation") {
  PreferenceLists p = four_by_four();
  p.group[1] = {0, 0, 1, 2};
  CHECK_THROWS_AS(validate(p), ConfigError);
  p = four_by_four();
  p.channel[0].pop_back();
  CHECK_THROWS_AS(match_one_to_one(p), ConfigError);
  CHECK_THROWS_AS(match_rounds(four_by_four(), 0, 1), DomainError);
}

TEST_CASE("build_preferences: equal interference falls back to index order") {
  Scenario s = test::tiny_scenario(3, 3);
  GainTable g(s);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t m = 0; m < 3; ++m) {
      g.group_to_bs(k, m) = 0.5;
      g.cue_to_receiver(m, k, 0) = 0.5;
    }
  const PreferenceLists p = build_preferences(Assignment(3, 3), initial_preference_powers(s), g, s);
  for (const auto& l : p.group) CHECK(l == std::vector<std::size_t>{0, 1, 2});
  for (const auto& l : p.channel) CHECK(l == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("build_preferences: single group and channel") {
  Scenario s = test::tiny_scenario(1, 1);
  GainTable g(s);
  const PreferenceLists p = build_preferences(Assignment(1, 1), initial_preference_powers(s), g, s);
  CHECK(p.group == std::vector<std::vector<std::size_t>>{{0}});
  CHECK(p.channel == std::vector<std::vector<std::size_t>>{{0}});
}

TEST_CASE("build_preferences ranks by interference and contribution") {
  Scenario s = test::tiny_scenario(2, 3);
  GainTable g(s);
  // group 0 hears CUEs 0,1,2 at 0.3, 0.1, 0.2
  g.cue_to_receiver(0, 0, 0) = 0.3;
  g.cue_to_receiver(1, 0, 0) = 0.1;
  g.cue_to_receiver(2, 0, 0) = 0.2;
  // channel 0 sees group 1 weaker than group 0
  g.group_to_bs(0, 0) = 0.9;
  g.group_to_bs(1, 0) = 0.4;
  const PreferenceLists p = build_preferences(Assignment(2, 3), initial_preference_powers(s), g, s);
  CHECK(p.group[0] == std::vector<std::size_t>{1, 2, 0});
  CHECK(p.channel[0] == std::vector<std::size_t>{1, 0});
}

TEST_CASE("build_preferences counts co-channel groups of the current assignment") {
  Scenario s = test::tiny_scenario(2, 2);
  GainTable g(s);
  g.tx_to_receiver(1, 0, 0, 0) = 2.0;
  g.cue_to_receiver(1, 0, 0) = 0.5;
  PowerAllocation pw = initial_preference_powers(s);
  Assignment a(2, 2);
  CHECK(build_preferences(a, pw, g, s).group[0] == std::vector<std::size_t>{0, 1});
  a.set(1, 0, true);
  CHECK(build_preferences(a, pw, g, s).group[0] == std::vector<std::size_t>{1, 0});
}

TEST_CASE("prospective powers keep used channels and spread the mean elsewhere") {
  Scenario s = test::tiny_scenario(2, 3);
  Assignment a(2, 3);
  a.set(0, 0, true);
  a.set(0, 1, true);
  PowerAllocation opt(2, 3);
  opt.cue = {0.1, 0.2, 0.3};
  opt.grp(0, 0) = 0.2;
  opt.grp(0, 1) = 0.4;
  const PowerAllocation p = prospective_powers(s, a, opt);
  CHECK(p.cue == opt.cue);
  CHECK(p.grp(0, 0) == doctest::Approx(0.2));
  CHECK(p.grp(0, 2) == doctest::Approx(0.3));
  CHECK(p.grp(1, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("scenario matchers: capacities and split 1 equivalence") {
  GeneratorParams gp;
  gp.num_groups = 6;
  gp.num_channels = 3;
  gp.reuse_factor = 2;
  gp.split_factor = 1;
  const Instance inst = generate_instance(gp, 5);
  const auto pw = initial_preference_powers(inst.scenario);
  const MatchResult one = match_many_to_one(inst.scenario, inst.gains, pw);
  const MatchResult many = match_many_to_many(inst.scenario, inst.gains, pw);
  CHECK(one.assignment == many.assignment);
  CHECK(one.assignment.respects(1, 2));
  CHECK(is_stable(one.assignment, one.final_prefs, 2, 1).stable);

  Scenario s2 = inst.scenario;
  s2.split_factor = 2;
  const MatchResult m2 = match_many_to_many(s2, inst.gains, pw);
  CHECK(m2.assignment.respects(2, 2));
  CHECK(is_stable(m2.assignment, m2.final_prefs, 2, 2).stable);
}

TEST_CASE("match trace serialises every round") {
  MatchTrace trace;
  match_rounds(four_by_four(), 2, 2, {}, &trace);
  const auto j = to_json(trace);
  REQUIRE(j["rounds"].size() == 2);
  CHECK(j["rounds"][0]["capacity"] == 1);
  CHECK(j["rounds"][0]["outcome"][3] == std::vector<std::size_t>{0, 1});
}
