#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "partadvisor/committee.hpp"
#include "partadvisor/run_config.hpp"

namespace partadvisor {

/// Exit codes of the command-line front end.
enum ExitCode { kExitOk = 0, kExitInput = 2, kExitRuntime = 3 };

/// A trained advisor on disk: a directory with manifest.json, schema.json, config.json,
/// agent checkpoints, and for online bundles the runtime cache.
struct Bundle {
  enum class Phase { kOffline, kOnline };
  Phase phase = Phase::kOffline;
  Schema schema;
  RunConfig config;
  DqnAgent naive;
  std::optional<Committee> committee;
  RuntimeCache cache;
  PartitioningState offline_partitioning;
};

void save_bundle(const std::string& dir, const Bundle& bundle);
Bundle load_bundle(const std::string& dir);

/// Online session matching an online bundle, with its cache restored.
OnlineSession open_session(const Bundle& bundle);

/// Reads a mix document: a JSON array of frequencies or {"frequencies": [...]}.
WorkloadMix load_mix(const std::string& path, int query_count);

/// Entry point of the partadvisor executable.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace partadvisor
