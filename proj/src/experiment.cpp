#include "d2md/experiment.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "d2md/scenario_io.hpp"

namespace d2md {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
std::vector<T> list_or_scalar(const json& j, const char* key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  try {
    if (v.is_array()) return v.get<std::vector<T>>();
    return {v.get<T>()};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return v.empty() ? std::nan("") : 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

void ExperimentConfig::validate() const {
  if (max_power_dbm.empty() || num_groups.empty() || num_channels.empty() || reuse_factor.empty() ||
      split_factor.empty() || min_rate.empty())
    throw ConfigError("sweep lists must be nonempty");
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (attempt_factor < 1) throw ConfigError("attempt_factor must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  for (int k : num_groups)
    if (k < 1) throw ConfigError("num_groups must be >= 1");
  for (int m : num_channels)
    if (m < 1) throw ConfigError("num_channels must be >= 1");
  for (int r : reuse_factor)
    if (r < 1) throw ConfigError("reuse_factor must be >= 1");
  for (int s : split_factor)
    if (s < 1) throw ConfigError("split_factor must be >= 1");
  for (double r : min_rate)
    if (!(r >= 0.0)) throw ConfigError("min rates must be >= 0");
  joint.solver.validate();
}

std::vector<SweepPoint> ExperimentConfig::sweep() const {
  std::vector<SweepPoint> out;
  for (double p : max_power_dbm)
    for (int k : num_groups)
      for (int m : num_channels)
        for (int r : reuse_factor)
          for (int s : split_factor)
            for (double q : min_rate) out.push_back({p, k, m, r, s, q});
  return out;
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j,
             {"name", "objective", "regime", "algorithm", "replications", "base_seed", "attempt_factor", "threads",
              "scenario", "solver"},
             "experiment config");
  ExperimentConfig c;
  read(j, "name", c.name);
  if (j.contains("objective")) c.objective = parse_objective(j.at("objective").get<std::string>());
  if (j.contains("regime")) c.regime = parse_regime(j.at("regime").get<std::string>());
  if (j.contains("algorithm")) {
    const auto a = j.at("algorithm").get<std::string>();
    if (a == "matching") c.algorithm = Algorithm::Matching;
    else if (a == "greedy") c.algorithm = Algorithm::Greedy;
    else throw ConfigError("unknown algorithm '" + a + "'");
  }
  read(j, "replications", c.replications);
  read(j, "base_seed", c.base_seed);
  read(j, "attempt_factor", c.attempt_factor);
  read(j, "threads", c.threads);

  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    check_keys(s,
               {"cell_radius_m", "expected_points", "clustering", "cue_selection", "path_loss_exponent",
                "noise_power_dbm", "circuit_power_dbm", "max_power_dbm", "num_groups", "num_channels",
                "reuse_factor", "split_factor", "min_rate_bps_hz", "min_rate_per_channel_bps_hz"},
               "scenario");
    GeneratorParams& g = c.scenario;
    read(s, "cell_radius_m", g.cell_radius);
    read(s, "expected_points", g.expected_points);
    read(s, "path_loss_exponent", g.path_loss_exponent);
    if (s.contains("noise_power_dbm")) g.noise_power = dbm_to_watt(s.at("noise_power_dbm").get<double>());
    if (s.contains("circuit_power_dbm")) g.circuit_power = dbm_to_watt(s.at("circuit_power_dbm").get<double>());
    read(s, "min_rate_per_channel_bps_hz", g.min_rate_per_channel);
    if (s.contains("clustering")) {
      const json& cl = s.at("clustering");
      check_keys(cl, {"method", "group_size", "d_max_fraction"}, "clustering");
      const auto method = cl.value("method", std::string("knn"));
      if (method == "knn") g.clustering = ClusterMethod::Knn;
      else if (method == "dl") g.clustering = ClusterMethod::DistanceLimited;
      else throw ConfigError("unknown clustering method '" + method + "'");
      read(cl, "group_size", g.group_size);
      read(cl, "d_max_fraction", g.d_max_fraction);
    }
    if (s.contains("cue_selection")) {
      const auto sel = s.at("cue_selection").get<std::string>();
      if (sel == "best_channel") g.cue_selection = CueSelection::BestChannel;
      else if (sel == "random") g.cue_selection = CueSelection::Random;
      else throw ConfigError("unknown cue_selection '" + sel + "'");
    }
    c.max_power_dbm = list_or_scalar<double>(s, "max_power_dbm", c.max_power_dbm);
    c.num_groups = list_or_scalar<int>(s, "num_groups", c.num_groups);
    c.num_channels = list_or_scalar<int>(s, "num_channels", c.num_channels);
    c.reuse_factor = list_or_scalar<int>(s, "reuse_factor", c.reuse_factor);
    c.split_factor = list_or_scalar<int>(s, "split_factor", c.split_factor);
    c.min_rate = list_or_scalar<double>(s, "min_rate_bps_hz", c.min_rate);
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s,
               {"dinkelbach_eps", "dinkelbach_max_iter", "sca_max_iter", "sca_rel_tol", "inner_max_iter",
                "inner_grad_tol", "max_outer"},
               "solver");
    SolverConfig& sc = c.joint.solver;
    read(s, "dinkelbach_eps", sc.dinkelbach_eps);
    read(s, "dinkelbach_max_iter", sc.dinkelbach_max_iter);
    read(s, "sca_max_iter", sc.sca_max_iter);
    read(s, "sca_rel_tol", sc.sca_rel_tol);
    read(s, "inner_max_iter", sc.inner_max_iter);
    read(s, "inner_grad_tol", sc.inner_grad_tol);
    read(s, "max_outer", c.joint.max_outer);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path));
}

void apply_profile(ExperimentConfig& config, const std::string& profile) {
  if (profile == "ci") config.replications = kCiReplications;
  else if (profile == "paper") config.replications = kPaperReplications;
  else throw ConfigError("unknown profile '" + profile + "' (expected ci or paper)");
}

GeneratorParams generator_for(const ExperimentConfig& config, const SweepPoint& p) {
  GeneratorParams g = config.scenario;
  g.num_groups = p.num_groups;
  g.num_channels = p.num_channels;
  g.reuse_factor = p.reuse_factor;
  g.split_factor = p.split_factor;
  g.max_power_cue = g.max_power_group = dbm_to_watt(p.max_power_dbm);
  g.min_rate_cue = g.min_rate_group = p.min_rate;
  return g;
}

ReplicationOutcome run_replication(const ExperimentConfig& config, const SweepPoint& point, std::uint64_t seed,
                                   bool trace) {
  ReplicationOutcome out;
  out.seed = seed;
  try {
    const Instance inst = generate_instance(generator_for(config, point), seed);
    Solution sol;
    if (config.algorithm == Algorithm::Greedy) {
      sol = greedy_baseline(inst.scenario, inst.gains, config.objective, config.regime, config.joint);
    } else {
      JointTrace jt;
      sol = solve_joint(inst.scenario, inst.gains, config.objective, config.regime, config.joint, nullptr,
                        trace ? &jt : nullptr);
      if (trace) out.trace = std::move(jt);
    }
    out.feasible = sol.feasible;
    if (!sol.feasible) out.failure = "solution failed the feasibility check";
    out.solution = std::move(sol);
  } catch (const InsufficientPoints& e) {
    out.failure = std::string("generation: ") + e.what();
  } catch (const Infeasible& e) {
    out.failure = std::string("infeasible: ") + e.what();
  }
  return out;
}

namespace {

json trace_record(const SweepPoint& p, const ReplicationOutcome& o) {
  json j = {{"max_power_dbm", p.max_power_dbm}, {"num_groups", p.num_groups},   {"num_channels", p.num_channels},
            {"reuse_factor", p.reuse_factor},   {"split_factor", p.split_factor}, {"min_rate", p.min_rate},
            {"seed", o.seed}};
  if (o.solution) j["solution"] = to_json(*o.solution);
  if (o.trace) {
    json rounds = json::array();
    for (std::size_t i = 0; i < o.trace->matching.size(); ++i) {
      json it = to_json(o.trace->matching[i]);
      if (i < o.trace->assignments.size()) {
        it["assignment"] = o.trace->assignments[i].to_string();
        const double v = o.trace->objectives[i];
        it["objective"] = std::isnan(v) ? json(nullptr) : json(v);
      }
      rounds.push_back(it);
    }
    j["outer_iterations"] = rounds;
  }
  return j;
}

ResultRow aggregate(const SweepPoint& p, const std::vector<ReplicationOutcome>& accepted, int infeasible,
                    bool cap_hit) {
  ResultRow row;
  row.point = p;
  std::vector<double> gee, wee, agg, user, minr, pw, mi, dk;
  for (const auto& o : accepted) {
    const Solution& s = *o.solution;
    gee.push_back(s.metrics.gee);
    wee.push_back(s.metrics.wee);
    agg.push_back(s.metrics.aggregate_rate());
    const double users = static_cast<double>(s.metrics.rate_cue.size() + s.metrics.rate_grp.size());
    user.push_back(s.metrics.aggregate_rate() / users);
    minr.push_back(s.metrics.min_user_rate());
    pw.push_back(s.metrics.total_power);
    mi.push_back(s.matcher_iterations);
    dk.push_back(s.dinkelbach_rounds);
  }
  row.mean_gee = mean_of(gee);
  row.se_gee = stderr_of(gee);
  row.mean_wee = mean_of(wee);
  row.se_wee = stderr_of(wee);
  row.mean_aggregate_rate = mean_of(agg);
  row.mean_user_rate = mean_of(user);
  row.mean_min_user_rate = mean_of(minr);
  row.mean_total_power = mean_of(pw);
  row.feasible_count = static_cast<int>(accepted.size());
  row.infeasible_count = infeasible;
  row.attempt_cap_exceeded = cap_hit;
  row.mean_matcher_iterations = mean_of(mi);
  row.mean_dinkelbach_rounds = mean_of(dk);
  return row;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, ExperimentTrace* trace,
                                      const ProgressFn& progress) {
  config.validate();
  std::vector<ResultRow> rows;
  const int cap = config.attempt_factor * config.replications;
  const int batch = std::max(1, config.threads);
  for (const auto& point : config.sweep()) {
    std::vector<ReplicationOutcome> accepted;
    int infeasible = 0;
    int attempt = 0;
    bool traced = false;
    while (static_cast<int>(accepted.size()) < config.replications && attempt < cap) {
      const int n = std::min(batch, cap - attempt);
      std::vector<ReplicationOutcome> results(static_cast<std::size_t>(n));
      const bool want_trace = trace && !traced;
      auto work = [&](int i) {
        results[static_cast<std::size_t>(i)] =
            run_replication(config, point, config.base_seed + static_cast<std::uint64_t>(attempt + i), want_trace);
      };
      if (n == 1) {
        work(0);
      } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n; ++i) pool.emplace_back(work, i);
        for (auto& t : pool) t.join();
      }
      for (auto& r : results) {
        if (static_cast<int>(accepted.size()) >= config.replications) break;
        ++attempt;
        if (r.feasible) {
          if (want_trace && !traced) {
            trace->points.push_back(trace_record(point, r));
            traced = true;
          }
          accepted.push_back(std::move(r));
        } else {
          ++infeasible;
        }
      }
    }
    const bool cap_hit = static_cast<int>(accepted.size()) < config.replications;
    rows.push_back(aggregate(point, accepted, infeasible, cap_hit));
    if (progress) progress(point, rows.back());
  }
  return rows;
}

std::vector<std::string> csv_header() {
  return {"max_power_dbm",
          "num_groups",
          "num_channels",
          "reuse_factor",
          "split_factor",
          "min_rate_bps_hz",
          "mean_gee_bits_per_joule",
          "se_gee_bits_per_joule",
          "mean_wee_bits_per_joule",
          "se_wee_bits_per_joule",
          "mean_aggregate_rate_bps_hz",
          "mean_user_rate_bps_hz",
          "mean_min_user_rate_bps_hz",
          "mean_total_power_w",
          "feasible_count",
          "infeasible_count",
          "attempt_cap_exceeded",
          "mean_matcher_iterations",
          "mean_dinkelbach_rounds"};
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  int precision = 5;
  if (v != 0.0) precision = std::max(0, 5 - static_cast<int>(std::floor(std::log10(std::abs(v)))));
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

std::string csv_line(const ResultRow& r) {
  std::ostringstream os;
  const auto& p = r.point;
  os << format_number(p.max_power_dbm) << ',' << p.num_groups << ',' << p.num_channels << ',' << p.reuse_factor
     << ',' << p.split_factor << ',' << format_number(p.min_rate) << ',' << format_number(r.mean_gee) << ','
     << format_number(r.se_gee) << ',' << format_number(r.mean_wee) << ',' << format_number(r.se_wee) << ','
     << format_number(r.mean_aggregate_rate) << ',' << format_number(r.mean_user_rate) << ','
     << format_number(r.mean_min_user_rate) << ',' << format_number(r.mean_total_power) << ',' << r.feasible_count
     << ',' << r.infeasible_count << ',' << (r.attempt_cap_exceeded ? 1 : 0) << ','
     << format_number(r.mean_matcher_iterations) << ',' << format_number(r.mean_dinkelbach_rounds);
  return os.str();
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out;
  const auto header = csv_header();
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& r : rows) out += csv_line(r) + '\n';
  return out;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  if (rows.empty()) throw Error("emit_csv: no rows to write to " + path.string());
  const std::string text = to_csv(rows);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("emit_csv: cannot open " + path.string());
  out << text;
  out.close();
  if (!out) throw Error("emit_csv: write failed for " + path.string());
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != csv_header().size()) throw ConfigError("CSV row has " + std::to_string(f.size()) + " fields");
    auto d = [&](std::size_t i) { return std::stod(f[i]); };
    ResultRow r;
    r.point = {d(0), std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3]), std::stoi(f[4]), d(5)};
    r.mean_gee = d(6);
    r.se_gee = d(7);
    r.mean_wee = d(8);
    r.se_wee = d(9);
    r.mean_aggregate_rate = d(10);
    r.mean_user_rate = d(11);
    r.mean_min_user_rate = d(12);
    r.mean_total_power = d(13);
    r.feasible_count = std::stoi(f[14]);
    r.infeasible_count = std::stoi(f[15]);
    r.attempt_cap_exceeded = f[16] == "1";
    r.mean_matcher_iterations = d(17);
    r.mean_dinkelbach_rounds = d(18);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace d2md
