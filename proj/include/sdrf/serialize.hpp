#pragma once

#include <json.hpp>
#include <string>

#include "sdrf/forest.hpp"
#include "sdrf/sim.hpp"
#include "sdrf/survey.hpp"

namespace sdrf {

using Json = nlohmann::json;

inline constexpr int kForestFormatVersion = 1;

// Config objects are parsed strictly: any key not listed here is a
// ConfigError naming the key. Missing keys keep the value in `base`.
ForestConfig forest_config_from_json(const Json& j, const ForestConfig& base = {});
Json to_json(const ForestConfig& cfg);

// When "N" is present the calibrated preset for that N is the starting point.
SimConfig sim_config_from_json(const Json& j);
Json to_json(const SimConfig& cfg);

Json to_json(const SurveySample& sample);
SurveySample sample_from_json(const Json& j);

Json to_json(const Forest& forest);
// Leaves are rebuilt from the stored structure, partitions and multipliers.
Forest forest_from_json(const Json& j);

void save_forest(const std::string& path, const Forest& forest);
Forest load_forest(const std::string& path);

Json to_json(const DesignDiagnostics& d);

// Aggregate rows plus the recorded per-seed failures.
Json aggregate_json(const MetricsReport& report);

Json read_json_file(const std::string& path);

}  // namespace sdrf
