#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "d2md/experiment.hpp"

using namespace d2md;
using nlohmann::json;

namespace {

json small_config() {
  return json::parse(R"({
    "name": "t",
    "objective": "gee",
    "regime": "one_to_one",
    "replications": 3,
    "base_seed": 11,
    "scenario": {
      "noise_power_dbm": -47.447,
      "circuit_power_dbm": 10,
      "max_power_dbm": [5, 10],
      "num_groups": 3,
      "num_channels": 3,
      "min_rate_bps_hz": 0.1
    }
  })");
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = config_from_json(small_config());
  CHECK(c.name == "t");
  CHECK(c.replications == 3);
  CHECK(c.base_seed == 11);
  CHECK(c.max_power_dbm == std::vector<double>{5, 10});
  CHECK(c.num_groups == std::vector<int>{3});
  CHECK(c.scenario.circuit_power == doctest::Approx(0.01));
  CHECK(c.scenario.noise_power == doctest::Approx(1.8e-8).epsilon(1e-4));
  CHECK(c.sweep().size() == 2);
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
  json j = small_config();
  j["colour"] = "red";
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = small_config();
  j["scenario"]["num_users"] = 4;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = small_config();
  j["regime"] = "all_to_all";
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = small_config();
  j["replications"] = 0;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = small_config();
  j["scenario"]["num_groups"] = "three";
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = small_config();
  j["scenario"]["min_rate_bps_hz"] = -1.0;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("profiles set the replication count") {
  ExperimentConfig c = config_from_json(small_config());
  apply_profile(c, "ci");
  CHECK(c.replications == kCiReplications);
  apply_profile(c, "paper");
  CHECK(c.replications == kPaperReplications);
  CHECK_THROWS_AS(apply_profile(c, "fast"), ConfigError);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.0) == "0.00000");
  CHECK(format_number(1.5) == "1.50000");
  CHECK(format_number(123.456789) == "123.457");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("csv round trip") {
  ResultRow r;
  r.point = {10.0, 5, 5, 2, 1, 0.5};
  r.mean_gee = 412.34567;
  r.se_gee = 3.21;
  r.mean_wee = 50.5;
  r.feasible_count = 50;
  r.infeasible_count = 2;
  r.attempt_cap_exceeded = true;
  r.mean_matcher_iterations = 3.5;
  r.mean_dinkelbach_rounds = 7.25;
  const std::string text = to_csv({r});
  std::istringstream in(text);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 2);
  const auto back = parse_csv(text);
  REQUIRE(back.size() == 1);
  CHECK(back[0].point == r.point);
  CHECK(back[0].mean_gee == doctest::Approx(r.mean_gee).epsilon(1e-5));
  CHECK(back[0].feasible_count == 50);
  CHECK(back[0].infeasible_count == 2);
  CHECK(back[0].attempt_cap_exceeded);
  CHECK(back[0].mean_dinkelbach_rounds == doctest::Approx(7.25));
  CHECK(to_csv(back) == text);
}

TEST_CASE("emit_csv refuses an empty table and writes nothing") {
  const auto path = std::filesystem::temp_directory_path() / "d2md_empty_test.csv";
  std::filesystem::remove(path);
  CHECK_THROWS_AS(emit_csv({}, path), Error);
  CHECK_FALSE(std::filesystem::exists(path));
}

TEST_CASE("run_experiment is deterministic and counts attempts") {
  const ExperimentConfig c = config_from_json(small_config());
  const auto a = run_experiment(c);
  const auto b = run_experiment(c);
  REQUIRE(a.size() == 2);
  CHECK(to_csv(a) == to_csv(b));
  for (const auto& row : a) {
    CHECK(row.attempts() == row.feasible_count + row.infeasible_count);
    CHECK(row.attempts() <= c.attempt_factor * c.replications);
    if (!row.attempt_cap_exceeded) CHECK(row.feasible_count == c.replications);
  }
}

TEST_CASE("sweep points do not depend on their neighbours") {
  ExperimentConfig both = config_from_json(small_config());
  ExperimentConfig only = both;
  only.max_power_dbm = {10};
  const auto a = run_experiment(both);
  const auto b = run_experiment(only);
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 1);
  CHECK(csv_line(a[1]) == csv_line(b[0]));
}

TEST_CASE("threads do not change results") {
  ExperimentConfig c = config_from_json(small_config());
  c.max_power_dbm = {10};
  const auto serial = run_experiment(c);
  c.threads = 3;
  CHECK(to_csv(run_experiment(c)) == to_csv(serial));
}

TEST_CASE("trace captures the first feasible replication") {
  ExperimentConfig c = config_from_json(small_config());
  c.max_power_dbm = {10};
  ExperimentTrace tr;
  run_experiment(c, &tr);
  REQUIRE(tr.points.size() == 1);
  CHECK(tr.points[0].contains("solution"));
  CHECK(tr.points[0].contains("outer_iterations"));
}

TEST_CASE("load_config reads a file") {
  const auto path = std::filesystem::temp_directory_path() / "d2md_cfg_test.json";
  {
    std::ofstream out(path);
    out << small_config().dump();
  }
  CHECK(load_config(path).name == "t");
  std::filesystem::remove(path);
  CHECK_THROWS(load_config(path));
}
