#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "d2md/types.hpp"

namespace d2md {

/// Ascending-interference preference orders of both sides of the market.
struct PreferenceLists {
  std::vector<std::vector<std::size_t>> group;    // group k: channels, most preferred first
  std::vector<std::vector<std::size_t>> channel;  // channel m: groups, most preferred first

  std::size_t num_groups() const { return group.size(); }
  std::size_t num_channels() const { return channel.size(); }

  friend bool operator==(const PreferenceLists&, const PreferenceLists&) = default;
};

/// Throws ConfigError unless every list is a permutation of the opposite index set.
void validate(const PreferenceLists& prefs);

/// Group lists rank channels by worst-receiver interference given `assignment`,
/// channel lists rank groups by their own contribution p_k^(m) h_k^(m). Ties go
/// to the lower index.
PreferenceLists build_preferences(const Assignment& assignment, const PowerAllocation& powers, const GainTable& gains,
                                  const Scenario& scenario);

/// Powers used to rank channels before any optimisation: CUEs at full budget,
/// each group's budget split evenly over all channels.
PowerAllocation initial_preference_powers(const Scenario& scenario);

/// Prospective powers for preference construction after an optimisation pass:
/// actual powers on used channels and the group's mean per-RB power elsewhere.
PowerAllocation prospective_powers(const Scenario& scenario, const Assignment& assignment,
                                   const PowerAllocation& optimized);

struct MatchRound {
  int capacity = 1;
  PreferenceLists prefs;
  Assignment outcome;
  int proposals = 0;
};

struct MatchTrace {
  std::vector<MatchRound> rounds;
};

nlohmann::json to_json(const PreferenceLists& prefs);
nlohmann::json to_json(const MatchTrace& trace);

/// Group-proposing deferred acceptance, one channel per group and one group per channel.
Assignment match_one_to_one(const PreferenceLists& prefs, MatchTrace* trace = nullptr);

/// Called between rounds with the current partial match; returns the preference
/// lists for the next round.
using PreferenceUpdate = std::function<PreferenceLists(const Assignment&)>;

struct MatchResult {
  Assignment assignment;
  PreferenceLists final_prefs;  // snapshot used by the last round
  int rounds = 0;
  int proposals = 0;
};

/// Round-based matching with reuse factor `reuse` and split factor `split`.
/// Rounds 1..r-1 grow every channel's capacity by one slot per round and carry
/// their outcome forward; the last round re-runs deferred acceptance for all
/// groups at full capacity r so the result is pairwise stable under the final
/// preferences. Without `update` the preferences stay fixed.
MatchResult match_rounds(const PreferenceLists& initial, int reuse, int split, const PreferenceUpdate& update = {},
                         MatchTrace* trace = nullptr);

MatchResult match_many_to_one(const Scenario& scenario, const GainTable& gains, const PowerAllocation& pref_powers,
                              MatchTrace* trace = nullptr);
MatchResult match_many_to_many(const Scenario& scenario, const GainTable& gains, const PowerAllocation& pref_powers,
                               MatchTrace* trace = nullptr);

struct StabilityReport {
  bool stable = true;
  std::optional<std::pair<std::size_t, std::size_t>> blocking_pair;  // (group, channel)
};

/// Exhaustive blocking-pair scan.
StabilityReport is_stable(const Assignment& assignment, const PreferenceLists& prefs, int reuse, int split);

}  // namespace d2md
