#pragma once

#include <string>

#include "json.hpp"
#include "partadvisor/cluster_sim.hpp"
#include "partadvisor/committee.hpp"
#include "partadvisor/cost_model.hpp"
#include "partadvisor/training.hpp"

namespace partadvisor {

/// One run configuration document with sections train, deploy, sim_profile, committee.
/// Every field is optional; omitted fields keep the defaults of the structs below.
struct RunConfig {
  TrainConfig train;
  DeploymentConfig deploy;
  /// Its deploy section starts as a copy of `deploy` and may override fields.
  SimProfile sim_profile;
  SamplingConfig sampling;
  CommitteeConfig committee;
};

/// Throws InputError naming the offending field.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);
nlohmann::json run_config_to_json(const RunConfig& config);

/// Checks references to tables (skew, scan exponents, fixed mix length) against a schema.
void check_against_schema(const RunConfig& config, const Schema& schema);

nlohmann::json read_json_file(const std::string& path);

}  // namespace partadvisor
