#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "d2md/types.hpp"

namespace d2md {

/// splitmix64 mix of (seed, stream); used to give each random consumer its own stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Homogeneous PPP on the disc of `radius` centred on the base station.
std::vector<Point> generate_ppp(double density, double radius, std::uint64_t seed);

struct Clustering {
  std::vector<Group> groups;
  std::vector<std::size_t> head_index;                  // index into the input point set
  std::vector<std::vector<std::size_t>> member_index;   // receivers, index into the input point set
  std::vector<std::size_t> unassigned;                  // points that belong to no group
};

/// Nearest-head assignment for fixed heads; groups are trimmed to `target_size`
/// members (head included) keeping the nearest receivers. Groups that fall
/// short are returned with fewer receivers; callers decide whether to keep them.
Clustering assign_knn(std::span<const Point> points, std::span<const std::size_t> heads, int target_size);

/// Every point within d_max of at least one head joins the nearest such head
/// (lower head index on ties).
Clustering assign_dl(std::span<const Point> points, std::span<const std::size_t> heads, double d_max);

inline constexpr int kClusterRetries = 100;

/// KNN clustering. `target_size` is |S_k|, the group size including the head.
/// Throws InsufficientPoints when K full groups cannot be formed.
Clustering cluster_knn(std::span<const Point> points, int num_groups, int target_size, std::uint64_t seed);

/// Distance-limited clustering with d_max = d_max_fraction * cell_radius.
Clustering cluster_dl(std::span<const Point> points, int num_groups, double d_max_fraction, double cell_radius,
                      std::uint64_t seed);

enum class Fading { Rayleigh, None };

/// Pure path loss with a 1 m minimum distance.
double path_gain(double distance_m, double path_loss_exponent);

GainTable compute_gains(const Scenario& scenario, double path_loss_exponent, std::uint64_t seed,
                        Fading fading = Fading::Rayleigh);

enum class ClusterMethod { Knn, DistanceLimited };
enum class CueSelection { BestChannel, Random };

/// Parameters of the random instance generator. Powers in watts.
struct GeneratorParams {
  double cell_radius = 500.0;
  double expected_points = 250.0;
  int num_groups = 5;
  int num_channels = 5;
  ClusterMethod clustering = ClusterMethod::Knn;
  int group_size = 4;  // |S_k| for KNN
  double d_max_fraction = 0.125;
  CueSelection cue_selection = CueSelection::BestChannel;
  double path_loss_exponent = 2.5;
  double noise_power = 1.8e-8;
  double circuit_power = 0.01;
  double max_power_cue = 0.01;
  double max_power_group = 0.01;
  double min_rate_cue = 0.1;
  double min_rate_group = 0.1;
  double min_rate_per_channel = 0.0;
  int split_factor = 1;
  int reuse_factor = 1;
};

struct Instance {
  Scenario scenario;
  GainTable gains;
};

/// PPP deployment, clustering, CUE selection and fading, all driven by `seed`.
Instance generate_instance(const GeneratorParams& params, std::uint64_t seed);

}  // namespace d2md
