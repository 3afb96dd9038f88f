#include "d2md/matching.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "d2md/model.hpp"

namespace d2md {

namespace {

std::vector<std::size_t> ascending_order(const std::vector<double>& values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return idx;
}

// rank[i][j] = position of j in list i
std::vector<std::vector<std::size_t>> ranks(const std::vector<std::vector<std::size_t>>& lists, std::size_t n) {
  std::vector<std::vector<std::size_t>> out(lists.size(), std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < lists.size(); ++i)
    for (std::size_t pos = 0; pos < lists[i].size(); ++pos) out[i][lists[i][pos]] = pos;
  return out;
}

class Market {
 public:
  explicit Market(const PreferenceLists& prefs)
      : K_(prefs.num_groups()), M_(prefs.num_channels()), assignment_(K_, M_), held_(M_) {
    set_prefs(prefs);
  }

  void set_prefs(const PreferenceLists& prefs) {
    prefs_ = prefs;
    channel_rank_ = ranks(prefs.channel, K_);
  }

  void clear() {
    assignment_ = Assignment(K_, M_);
    for (auto& h : held_) h.clear();
  }

  // Runs one round. `lazy` re-queues a displaced group only once it holds no
  // channel at all (carried-forward rounds); otherwise it is re-queued as soon
  // as it drops below quota (plain deferred acceptance).
  int run_round(std::size_t capacity, std::size_t quota, bool lazy) {
    std::deque<std::size_t> queue;
    std::vector<bool> queued(K_, false);
    std::vector<std::size_t> next(K_, 0);
    for (std::size_t k = 0; k < K_; ++k)
      if (static_cast<std::size_t>(assignment_.row_sum(k)) < quota) {
        queue.push_back(k);
        queued[k] = true;
      }
    int proposals = 0;
    while (!queue.empty()) {
      const std::size_t k = queue.front();
      queue.pop_front();
      queued[k] = false;
      while (static_cast<std::size_t>(assignment_.row_sum(k)) < quota && next[k] < M_) {
        const std::size_t m = prefs_.group[k][next[k]++];
        if (assignment_(k, m)) continue;
        ++proposals;
        auto& holders = held_[m];
        if (holders.size() < capacity) {
          accept(k, m);
          continue;
        }
        const auto worst = *std::max_element(holders.begin(), holders.end(), [&](std::size_t a, std::size_t b) {
          return channel_rank_[m][a] < channel_rank_[m][b];
        });
        if (channel_rank_[m][k] < channel_rank_[m][worst]) {
          release(worst, m);
          accept(k, m);
          const bool requeue = lazy ? assignment_.row_sum(worst) == 0
                                    : static_cast<std::size_t>(assignment_.row_sum(worst)) < quota;
          if (requeue && !queued[worst]) {
            queue.push_back(worst);
            queued[worst] = true;
          }
        }
      }
    }
    return proposals;
  }

  const Assignment& assignment() const { return assignment_; }

 private:
  void accept(std::size_t k, std::size_t m) {
    held_[m].push_back(k);
    assignment_.set(k, m, true);
  }
  void release(std::size_t k, std::size_t m) {
    auto& h = held_[m];
    h.erase(std::find(h.begin(), h.end(), k));
    assignment_.set(k, m, false);
  }

  std::size_t K_;
  std::size_t M_;
  PreferenceLists prefs_;
  std::vector<std::vector<std::size_t>> channel_rank_;
  Assignment assignment_;
  std::vector<std::vector<std::size_t>> held_;
};

}  // namespace

void validate(const PreferenceLists& prefs) {
  auto is_perm = [](const std::vector<std::size_t>& v, std::size_t n) {
    if (v.size() != n) return false;
    std::vector<bool> seen(n, false);
    for (auto x : v) {
      if (x >= n || seen[x]) return false;
      seen[x] = true;
    }
    return true;
  };
  for (const auto& l : prefs.group)
    if (!is_perm(l, prefs.num_channels())) throw ConfigError("group preference list is not a permutation");
  for (const auto& l : prefs.channel)
    if (!is_perm(l, prefs.num_groups())) throw ConfigError("channel preference list is not a permutation");
}

PreferenceLists build_preferences(const Assignment& assignment, const PowerAllocation& powers, const GainTable& gains,
                                  const Scenario& scenario) {
  const std::size_t K = scenario.num_groups();
  const std::size_t M = scenario.num_channels();
  const OperatingPoint op{scenario, gains, assignment, powers};
  PreferenceLists prefs;
  prefs.group.resize(K);
  prefs.channel.resize(M);
  std::vector<double> alpha(M);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t m = 0; m < M; ++m) alpha[m] = interference_group(op, k, m);
    prefs.group[k] = ascending_order(alpha);
  }
  std::vector<double> contribution(K);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t k = 0; k < K; ++k) contribution[k] = powers.grp(k, m) * gains.group_to_bs(k, m);
    prefs.channel[m] = ascending_order(contribution);
  }
  return prefs;
}

PowerAllocation initial_preference_powers(const Scenario& scenario) {
  const std::size_t K = scenario.num_groups();
  const std::size_t M = scenario.num_channels();
  PowerAllocation p(K, M);
  p.cue = scenario.max_power_cue;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M; ++m) p.grp(k, m) = scenario.max_power_group[k] / static_cast<double>(M);
  return p;
}

PowerAllocation prospective_powers(const Scenario& scenario, const Assignment& assignment,
                                   const PowerAllocation& optimized) {
  const std::size_t K = scenario.num_groups();
  const std::size_t M = scenario.num_channels();
  PowerAllocation p(K, M);
  p.cue = optimized.cue;
  for (std::size_t k = 0; k < K; ++k) {
    const int used = assignment.row_sum(k);
    const double level = used > 0 ? optimized.group_total(k) / used
                                  : scenario.max_power_group[k] / static_cast<double>(M);
    for (std::size_t m = 0; m < M; ++m) p.grp(k, m) = assignment(k, m) ? optimized.grp(k, m) : level;
  }
  return p;
}

nlohmann::json to_json(const PreferenceLists& prefs) {
  return {{"group", prefs.group}, {"channel", prefs.channel}};
}

nlohmann::json to_json(const MatchTrace& trace) {
  auto rounds = nlohmann::json::array();
  for (const auto& r : trace.rounds) {
    auto pairs = nlohmann::json::array();
    for (std::size_t k = 0; k < r.outcome.num_groups(); ++k)
      pairs.push_back(r.outcome.channels_of(k));
    rounds.push_back({{"capacity", r.capacity},
                      {"preferences", to_json(r.prefs)},
                      {"outcome", pairs},
                      {"proposals", r.proposals}});
  }
  return {{"rounds", rounds}};
}

MatchResult match_rounds(const PreferenceLists& initial, int reuse, int split, const PreferenceUpdate& update,
                         MatchTrace* trace) {
  validate(initial);
  if (reuse < 1 || split < 1) throw DomainError("match_rounds: reuse and split must be >= 1");
  Market market(initial);
  MatchResult result;
  PreferenceLists prefs = initial;
  const auto quota = static_cast<std::size_t>(split);
  for (int round = 1; round <= reuse; ++round) {
    if (round > 1 && update) {
      prefs = update(market.assignment());
      validate(prefs);
      market.set_prefs(prefs);
    }
    const bool last = round == reuse;
    if (last) market.clear();
    const int proposals = market.run_round(static_cast<std::size_t>(round), quota, !last);
    result.proposals += proposals;
    if (trace) trace->rounds.push_back({round, prefs, market.assignment(), proposals});
  }
  result.assignment = market.assignment();
  result.final_prefs = prefs;
  result.rounds = reuse;
  return result;
}

Assignment match_one_to_one(const PreferenceLists& prefs, MatchTrace* trace) {
  return match_rounds(prefs, 1, 1, {}, trace).assignment;
}

namespace {

MatchResult match_from_scenario(const Scenario& scenario, const GainTable& gains, const PowerAllocation& pref_powers,
                                int reuse, int split, MatchTrace* trace) {
  const Assignment empty(scenario.num_groups(), scenario.num_channels());
  const auto initial = build_preferences(empty, pref_powers, gains, scenario);
  auto update = [&](const Assignment& partial) { return build_preferences(partial, pref_powers, gains, scenario); };
  return match_rounds(initial, reuse, split, update, trace);
}

}  // namespace

MatchResult match_many_to_one(const Scenario& scenario, const GainTable& gains, const PowerAllocation& pref_powers,
                              MatchTrace* trace) {
  return match_from_scenario(scenario, gains, pref_powers, scenario.reuse_factor, 1, trace);
}

MatchResult match_many_to_many(const Scenario& scenario, const GainTable& gains, const PowerAllocation& pref_powers,
                               MatchTrace* trace) {
  return match_from_scenario(scenario, gains, pref_powers, scenario.reuse_factor, scenario.split_factor, trace);
}

StabilityReport is_stable(const Assignment& assignment, const PreferenceLists& prefs, int reuse, int split) {
  const std::size_t K = prefs.num_groups();
  const std::size_t M = prefs.num_channels();
  const auto group_rank = ranks(prefs.group, M);
  const auto channel_rank = ranks(prefs.channel, K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto mine = assignment.channels_of(k);
    const bool spare_k = static_cast<int>(mine.size()) < split;
    std::size_t worst_k = 0;
    for (auto m : mine) worst_k = std::max(worst_k, group_rank[k][m]);
    for (std::size_t m : prefs.group[k]) {
      if (assignment(k, m)) continue;
      if (!spare_k && group_rank[k][m] >= worst_k) continue;
      const auto theirs = assignment.groups_on(m);
      bool spare_m = static_cast<int>(theirs.size()) < reuse;
      bool m_wants = spare_m;
      if (!m_wants)
        for (auto j : theirs)
          if (channel_rank[m][k] < channel_rank[m][j]) {
            m_wants = true;
            break;
          }
      if (m_wants) return {false, std::make_pair(k, m)};
    }
  }
  return {};
}

}  // namespace d2md
