#include "d2md/scenario_io.hpp"

#include <fstream>

namespace d2md {

namespace {

using nlohmann::json;

json power_dbm(double watt) {
  if (watt <= 0.0) return nullptr;
  return watt_to_dbm(watt);
}

double power_watt(const json& j) {
  if (j.is_null()) return 0.0;
  return dbm_to_watt(j.get<double>());
}

json powers_dbm(const std::vector<double>& w) {
  json out = json::array();
  for (double x : w) out.push_back(power_dbm(x));
  return out;
}

std::vector<double> powers_watt(const json& j) {
  std::vector<double> out;
  for (const auto& e : j) out.push_back(power_watt(e));
  return out;
}

json point(const Point& p) {
  return json::array({p.x, p.y});
}

Point point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("a position must be an [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const Scenario& s) {
  json groups = json::array();
  for (const auto& g : s.groups) {
    json rx = json::array();
    for (const auto& p : g.receivers) rx.push_back(point(p));
    groups.push_back({{"head", point(g.head)}, {"receivers", rx}});
  }
  json cues = json::array();
  for (const auto& p : s.cue_positions) cues.push_back(point(p));
  return {{"cell_radius_m", s.cell_radius},
          {"groups", groups},
          {"cue_positions", cues},
          {"noise_power_dbm", power_dbm(s.noise_power)},
          {"circuit_power_cue_dbm", powers_dbm(s.circuit_power_cue)},
          {"circuit_power_group_dbm", powers_dbm(s.circuit_power_group)},
          {"max_power_cue_dbm", powers_dbm(s.max_power_cue)},
          {"max_power_group_dbm", powers_dbm(s.max_power_group)},
          {"min_rate_cue", s.min_rate_cue},
          {"min_rate_group", s.min_rate_group},
          {"min_rate_per_channel", s.min_rate_per_channel},
          {"weight_cue", s.weight_cue},
          {"weight_group", s.weight_group},
          {"split_factor", s.split_factor},
          {"reuse_factor", s.reuse_factor}};
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.cell_radius = field<double>(j, "cell_radius_m");
  for (const auto& g : field<json>(j, "groups")) {
    Group grp;
    grp.head = point_from(field<json>(g, "head"));
    for (const auto& p : field<json>(g, "receivers")) grp.receivers.push_back(point_from(p));
    s.groups.push_back(std::move(grp));
  }
  for (const auto& p : field<json>(j, "cue_positions")) s.cue_positions.push_back(point_from(p));
  s.noise_power = power_watt(field<json>(j, "noise_power_dbm"));
  s.circuit_power_cue = powers_watt(field<json>(j, "circuit_power_cue_dbm"));
  s.circuit_power_group = powers_watt(field<json>(j, "circuit_power_group_dbm"));
  s.max_power_cue = powers_watt(field<json>(j, "max_power_cue_dbm"));
  s.max_power_group = powers_watt(field<json>(j, "max_power_group_dbm"));
  s.min_rate_cue = field<std::vector<double>>(j, "min_rate_cue");
  s.min_rate_group = field<std::vector<double>>(j, "min_rate_group");
  s.min_rate_per_channel = field<std::vector<double>>(j, "min_rate_per_channel");
  s.weight_cue = j.contains("weight_cue") ? field<std::vector<double>>(j, "weight_cue")
                                          : std::vector<double>(s.num_channels(), 1.0);
  s.weight_group = j.contains("weight_group") ? field<std::vector<double>>(j, "weight_group")
                                              : std::vector<double>(s.num_groups(), 1.0);
  s.split_factor = field<int>(j, "split_factor");
  s.reuse_factor = field<int>(j, "reuse_factor");
  s.validate();
  return s;
}

json to_json(const GainTable& g) {
  const std::size_t M = g.num_channels();
  const std::size_t K = g.num_groups();
  json cue_bs = json::array(), grp_bs = json::array(), tx_rx = json::array(), beta = json::array();
  for (std::size_t m = 0; m < M; ++m) cue_bs.push_back(g.cue_to_bs(m));
  for (std::size_t k = 0; k < K; ++k) {
    json row = json::array();
    for (std::size_t m = 0; m < M; ++m) row.push_back(g.group_to_bs(k, m));
    grp_bs.push_back(row);
  }
  for (std::size_t k = 0; k < K; ++k) {
    json per_rx = json::array(), beta_rx = json::array();
    for (std::size_t r = 0; r < g.num_receivers(k); ++r) {
      json per_tx = json::array(), b = json::array();
      for (std::size_t j = 0; j < K; ++j) {
        json row = json::array();
        for (std::size_t m = 0; m < M; ++m) row.push_back(g.tx_to_receiver(j, k, r, m));
        per_tx.push_back(row);
      }
      for (std::size_t m = 0; m < M; ++m) b.push_back(g.cue_to_receiver(m, k, r));
      per_rx.push_back(per_tx);
      beta_rx.push_back(b);
    }
    tx_rx.push_back(per_rx);
    beta.push_back(beta_rx);
  }
  return {{"cue_bs", cue_bs}, {"grp_bs", grp_bs}, {"tx_rx", tx_rx}, {"beta", beta}};
}

GainTable gains_from_json(const json& j, const Scenario& s) {
  GainTable g(s);
  const std::size_t M = s.num_channels();
  const std::size_t K = s.num_groups();
  try {
    for (std::size_t m = 0; m < M; ++m) g.cue_to_bs(m) = j.at("cue_bs").at(m).get<double>();
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t m = 0; m < M; ++m) g.group_to_bs(k, m) = j.at("grp_bs").at(k).at(m).get<double>();
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t r = 0; r < s.num_receivers(k); ++r) {
        for (std::size_t t = 0; t < K; ++t)
          for (std::size_t m = 0; m < M; ++m)
            g.tx_to_receiver(t, k, r, m) = j.at("tx_rx").at(k).at(r).at(t).at(m).get<double>();
        for (std::size_t m = 0; m < M; ++m) g.cue_to_receiver(m, k, r) = j.at("beta").at(k).at(r).at(m).get<double>();
      }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("gain table does not match the scenario: ") + e.what());
  }
  if (!g.consistent_with(s)) throw ConfigError("gain table has negative or non-finite entries");
  return g;
}

json to_json(const Instance& inst) {
  return {{"scenario", to_json(inst.scenario)}, {"gains", to_json(inst.gains)}};
}

Instance instance_from_json(const json& j) {
  Instance inst;
  inst.scenario = scenario_from_json(field<json>(j, "scenario"));
  if (j.contains("gains")) {
    inst.gains = gains_from_json(j.at("gains"), inst.scenario);
  } else {
    const double alpha = j.value("path_loss_exponent", 2.5);
    inst.gains = compute_gains(inst.scenario, alpha, field<std::uint64_t>(j, "gain_seed"));
  }
  return inst;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_instance(const std::filesystem::path& path, const Instance& instance) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(instance).dump(2) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

Instance load_instance(const std::filesystem::path& path) {
  return instance_from_json(read_json_file(path));
}

}  // namespace d2md
