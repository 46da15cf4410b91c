#pragma once

#include <ostream>
#include <vector>

#include "partadvisor/dqn_agent.hpp"
#include "partadvisor/inference.hpp"
#include "partadvisor/training.hpp"

namespace partadvisor {

struct CommitteeConfig {
  /// Frequency of the other queries in a probe mix.
  double f_low = 0.1;
  /// Frequency of the over-represented query in a probe mix.
  double f_high = 1.0;
  int expert_episodes = 300;
  /// Uniform draws tried per expert mix before falling back to the expert's probe mix.
  int max_routing_draws = 10000;
  /// Naive-agent retraining episodes after new queries arrive.
  int extension_episodes = 300;
  /// Episodes each existing expert is fine-tuned on its re-routed subspace after new queries
  /// arrive. Zero leaves old experts untouched.
  int expert_refresh_episodes = 100;
};

/// f_high for `query`, f_low for every other query.
WorkloadMix probe_mix(int query_count, int query, double f_low, double f_high);

struct ReferenceSet {
  std::vector<PartitioningState> states;
  /// Scaled cost of every query under each reference, from the scoring backend.
  std::vector<std::vector<double>> costs;
  /// Query whose probe mix first produced each reference.
  std::vector<int> probe_queries;

  std::size_t size() const { return states.size(); }
  /// Index of a reference with the same table designs, or -1.
  int find(const PartitioningState& p) const;
};

/// One greedy recommendation per probe mix, deduplicated by table designs.
ReferenceSet derive_references(const DqnAgent& naive, const Schema& schema, CostBackend& scorer,
                               const CommitteeConfig& config, int t_max);

/// Reference with the lowest weighted cost for `mix`; ties go to the lowest index.
int assign_subspace(const WorkloadMix& mix, const ReferenceSet& refs);

struct Committee {
  DqnAgent naive;
  ReferenceSet references;
  /// experts[k] serves the subspace of references.states[k].
  std::vector<DqnAgent> experts;
};

/// Mix sampler for expert `k`: uniform draws rejected until one routes to `k`, then the
/// probe mix of reference `k` once the draw budget is spent.
MixSampler routed_sampler(const ReferenceSet& refs, int k, int query_count, const CommitteeConfig& config);

/// Trains experts for references [first, refs.size()), each warm-started from the naive
/// agent with the reduced epsilon and fed only mixes of its own subspace.
std::vector<TrainingResult> train_experts(const DqnAgent& naive, const ReferenceSet& refs, std::size_t first,
                                          const Schema& schema, CostBackend& backend, OnlineBackend* online,
                                          const TrainConfig& config, const CommitteeConfig& committee,
                                          std::ostream* trace = nullptr);

/// derive_references followed by train_experts for every reference.
Committee build_committee(DqnAgent naive, const Schema& schema, CostBackend& backend, OnlineBackend* online,
                          CostBackend& scorer, const TrainConfig& config, const CommitteeConfig& committee,
                          std::ostream* trace = nullptr);

struct ExtensionResult {
  TrainingResult naive_retraining;
  std::vector<TrainingResult> new_experts;
  /// Fine-tuning runs of the experts that existed before, in reference order.
  std::vector<TrainingResult> refreshed_experts;
  /// Indices of references that did not exist before the extension.
  std::vector<int> new_references;
};

/// Adopts `extended` (same tables and edges, more queries): widens every agent's input,
/// retrains the naive agent on mixes covering all queries, re-derives references, briefly
/// refreshes the existing experts and trains new experts only for references that are new. Backends must be bound to `extended`.
ExtensionResult extend_with_queries(Committee& committee, const Schema& extended, CostBackend& backend,
                                    OnlineBackend* online, CostBackend& scorer, const TrainConfig& config,
                                    const CommitteeConfig& committee_config, std::ostream* trace = nullptr);

/// Routes the mix to its expert and rolls it out. Falls back to the reference itself
/// when that scores better than anything on the expert's trajectory.
Recommendation recommend_committee(const Committee& committee, const WorkloadMix& mix, const Schema& schema,
                                   CostBackend& scorer, int t_max);

}  // namespace partadvisor
