#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "partadvisor/dqn_agent.hpp"
#include "partadvisor/mdp.hpp"

namespace partadvisor {

struct Recommendation {
  PartitioningState state;
  double reward = -1.0;
  /// Reward of every visited state; index 0 is the starting state P_0.
  std::vector<double> trajectory_rewards;
  std::vector<int> actions;
  int best_step = 0;
  int trajectory_length = 0;
  /// Committee expert that produced the rollout, -1 for a single agent.
  int expert = -1;
  /// Set when the committee returned its reference partitioning because the expert's
  /// rollout never reached it.
  bool reference_fallback = false;
};

/// Position of the first maximum.
std::size_t best_index(std::span<const double> rewards);

/// Greedy rollout of t_max legal actions from P_0; returns the best state seen, with its
/// reward re-evaluated on `scorer`. Throws std::invalid_argument if the agent does not
/// fit the schema.
Recommendation recommend(const DqnAgent& agent, const WorkloadMix& mix, const Schema& schema, CostBackend& scorer,
                         int t_max);

/// Table name -> {"replicated": true} or {"partitioned_by": key}.
nlohmann::json designs_json(const PartitioningState& p, const Schema& schema);
nlohmann::json report_json(const Recommendation& r, const Schema& schema);
std::string report_table(const Recommendation& r, const Schema& schema);

}  // namespace partadvisor
