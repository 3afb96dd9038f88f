#pragma once

#include <filesystem>

#include <json.hpp>

#include "d2md/scenario.hpp"
#include "d2md/types.hpp"

namespace d2md {

/// Powers are written in dBm (zero watts as null), lengths in metres, rates in bit/s/Hz.
nlohmann::json to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GainTable& gains);
GainTable gains_from_json(const nlohmann::json& j, const Scenario& scenario);

/// {"scenario": ..., "gains": ...}. A file without "gains" must carry
/// "gain_seed" (and optionally "path_loss_exponent") so gains can be drawn.
nlohmann::json to_json(const Instance& instance);
Instance instance_from_json(const nlohmann::json& j);

void save_instance(const std::filesystem::path& path, const Instance& instance);
Instance load_instance(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace d2md
