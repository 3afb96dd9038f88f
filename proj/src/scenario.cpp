#include "d2md/scenario.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace d2md {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<Point> generate_ppp(double density, double radius, std::uint64_t seed) {
  if (!(density >= 0.0) || !(radius > 0.0)) throw DomainError("generate_ppp: density must be >= 0 and radius > 0");
  const double mean = density * std::numbers::pi * radius * radius;
  std::vector<Point> points;
  if (mean <= 0.0) return points;
  std::mt19937_64 rng(seed);
  std::poisson_distribution<long> count(mean);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const long n = count(rng);
  points.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double rho = radius * std::sqrt(unit(rng));
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    points.push_back({rho * std::cos(phi), rho * std::sin(phi)});
  }
  return points;
}

namespace {

std::vector<std::size_t> pick_heads(std::size_t n, int k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[pick(rng)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

Clustering finish(std::span<const Point> points, std::span<const std::size_t> heads,
                  std::vector<std::vector<std::size_t>> members) {
  Clustering out;
  std::vector<bool> used(points.size(), false);
  for (std::size_t h = 0; h < heads.size(); ++h) {
    Group g;
    g.head = points[heads[h]];
    used[heads[h]] = true;
    for (auto i : members[h]) {
      g.receivers.push_back(points[i]);
      used[i] = true;
    }
    out.groups.push_back(std::move(g));
    out.head_index.push_back(heads[h]);
  }
  out.member_index = std::move(members);
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!used[i]) out.unassigned.push_back(i);
  return out;
}

}  // namespace

Clustering assign_knn(std::span<const Point> points, std::span<const std::size_t> heads, int target_size) {
  std::vector<bool> is_head(points.size(), false);
  for (auto h : heads) is_head[h] = true;
  std::vector<std::vector<std::size_t>> members(heads.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (is_head[i]) continue;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < heads.size(); ++h) {
      const double d = distance(points[i], points[heads[h]]);
      if (d < best_d) {
        best_d = d;
        best = h;
      }
    }
    if (!heads.empty()) members[best].push_back(i);
  }
  const auto keep = static_cast<std::size_t>(std::max(target_size - 1, 0));
  for (std::size_t h = 0; h < heads.size(); ++h) {
    auto& v = members[h];
    const Point c = points[heads[h]];
    std::stable_sort(v.begin(), v.end(),
                     [&](std::size_t a, std::size_t b) { return distance(points[a], c) < distance(points[b], c); });
    if (v.size() > keep) v.resize(keep);
  }
  return finish(points, heads, std::move(members));
}

Clustering assign_dl(std::span<const Point> points, std::span<const std::size_t> heads, double d_max) {
  std::vector<bool> is_head(points.size(), false);
  for (auto h : heads) is_head[h] = true;
  std::vector<std::vector<std::size_t>> members(heads.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (is_head[i]) continue;
    std::size_t best = heads.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < heads.size(); ++h) {
      const double d = distance(points[i], points[heads[h]]);
      if (d <= d_max && d < best_d) {
        best_d = d;
        best = h;
      }
    }
    if (best < heads.size()) members[best].push_back(i);
  }
  return finish(points, heads, std::move(members));
}

Clustering cluster_knn(std::span<const Point> points, int num_groups, int target_size, std::uint64_t seed) {
  if (num_groups < 0 || target_size < 2) throw DomainError("cluster_knn: need K >= 0 and target size >= 2");
  if (num_groups == 0) return finish(points, {}, {});
  if (points.size() < static_cast<std::size_t>(num_groups) * static_cast<std::size_t>(target_size))
    throw InsufficientPoints("cluster_knn: " + std::to_string(points.size()) + " points cannot form " +
                             std::to_string(num_groups) + " groups of size " + std::to_string(target_size));
  for (int attempt = 0; attempt < kClusterRetries; ++attempt) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    const auto heads = pick_heads(points.size(), num_groups, rng);
    Clustering c = assign_knn(points, heads, target_size);
    const bool all_full = std::all_of(c.groups.begin(), c.groups.end(), [&](const Group& g) {
      return g.receivers.size() + 1 == static_cast<std::size_t>(target_size);
    });
    if (all_full) return c;
  }
  throw InsufficientPoints("cluster_knn: fewer than " + std::to_string(num_groups) +
                           " groups reached the target size after retries");
}

Clustering cluster_dl(std::span<const Point> points, int num_groups, double d_max_fraction, double cell_radius,
                      std::uint64_t seed) {
  if (!(d_max_fraction > 0.0 && d_max_fraction <= 1.0))
    throw DomainError("cluster_dl: d_max_fraction must lie in (0, 1]");
  if (num_groups < 0) throw DomainError("cluster_dl: K must be >= 0");
  if (num_groups == 0) return finish(points, {}, {});
  if (points.size() < 2 * static_cast<std::size_t>(num_groups))
    throw InsufficientPoints("cluster_dl: not enough points for " + std::to_string(num_groups) + " groups");
  const double d_max = d_max_fraction * cell_radius;
  for (int attempt = 0; attempt < kClusterRetries; ++attempt) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    const auto heads = pick_heads(points.size(), num_groups, rng);
    Clustering c = assign_dl(points, heads, d_max);
    const bool none_empty =
        std::none_of(c.groups.begin(), c.groups.end(), [](const Group& g) { return g.receivers.empty(); });
    if (none_empty) return c;
  }
  throw InsufficientPoints("cluster_dl: some group stayed empty after retries (d_max = " + std::to_string(d_max) +
                           " m)");
}

double path_gain(double distance_m, double path_loss_exponent) {
  return std::pow(std::max(distance_m, 1.0), -path_loss_exponent);
}

GainTable compute_gains(const Scenario& scenario, double path_loss_exponent, std::uint64_t seed, Fading fading) {
  GainTable g(scenario);
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> fade_dist(1.0);
  auto fade = [&]() { return fading == Fading::Rayleigh ? fade_dist(rng) : 1.0; };
  const std::size_t M = scenario.num_channels();
  const std::size_t K = scenario.num_groups();
  const Point bs{};

  for (std::size_t m = 0; m < M; ++m) g.cue_to_bs(m) = fade() * path_gain(distance(scenario.cue_positions[m], bs), path_loss_exponent);
  for (std::size_t k = 0; k < K; ++k) {
    const double pl = path_gain(distance(scenario.groups[k].head, bs), path_loss_exponent);
    for (std::size_t m = 0; m < M; ++m) g.group_to_bs(k, m) = fade() * pl;
  }
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t r = 0; r < scenario.num_receivers(k); ++r) {
      const Point rx = scenario.groups[k].receivers[r];
      for (std::size_t j = 0; j < K; ++j) {
        const double pl = path_gain(distance(scenario.groups[j].head, rx), path_loss_exponent);
        for (std::size_t m = 0; m < M; ++m) g.tx_to_receiver(j, k, r, m) = fade() * pl;
      }
      for (std::size_t m = 0; m < M; ++m)
        g.cue_to_receiver(m, k, r) = fade() * path_gain(distance(scenario.cue_positions[m], rx), path_loss_exponent);
    }
  }
  return g;
}

Instance generate_instance(const GeneratorParams& params, std::uint64_t seed) {
  const double area = std::numbers::pi * params.cell_radius * params.cell_radius;
  const auto points = generate_ppp(params.expected_points / area, params.cell_radius, derive_seed(seed, 1));

  Clustering c = params.clustering == ClusterMethod::Knn
                     ? cluster_knn(points, params.num_groups, params.group_size, derive_seed(seed, 2))
                     : cluster_dl(points, params.num_groups, params.d_max_fraction, params.cell_radius,
                                  derive_seed(seed, 2));

  auto pool = c.unassigned;
  if (pool.size() < static_cast<std::size_t>(params.num_channels))
    throw InsufficientPoints("generate_instance: not enough unclustered points for " +
                             std::to_string(params.num_channels) + " CUEs");
  if (params.cue_selection == CueSelection::BestChannel) {
    const Point bs{};
    std::stable_sort(pool.begin(), pool.end(),
                     [&](std::size_t a, std::size_t b) { return distance(points[a], bs) < distance(points[b], bs); });
  } else {
    std::mt19937_64 rng(derive_seed(seed, 4));
    std::shuffle(pool.begin(), pool.end(), rng);
  }

  Instance inst;
  Scenario& s = inst.scenario;
  s.cell_radius = params.cell_radius;
  s.groups = std::move(c.groups);
  for (int m = 0; m < params.num_channels; ++m) s.cue_positions.push_back(points[pool[static_cast<std::size_t>(m)]]);
  const auto M = static_cast<std::size_t>(params.num_channels);
  const auto K = s.groups.size();
  s.noise_power = params.noise_power;
  s.circuit_power_cue.assign(M, params.circuit_power);
  s.circuit_power_group.assign(K, params.circuit_power);
  s.max_power_cue.assign(M, params.max_power_cue);
  s.max_power_group.assign(K, params.max_power_group);
  s.min_rate_cue.assign(M, params.min_rate_cue);
  s.min_rate_group.assign(K, params.min_rate_group);
  s.min_rate_per_channel.assign(K, params.min_rate_per_channel);
  s.weight_cue.assign(M, 1.0);
  s.weight_group.assign(K, 1.0);
  s.split_factor = params.split_factor;
  s.reuse_factor = params.reuse_factor;
  s.validate();

  inst.gains = compute_gains(s, params.path_loss_exponent, derive_seed(seed, 3));
  return inst;
}

}  // namespace d2md
