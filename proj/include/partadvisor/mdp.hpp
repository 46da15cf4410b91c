#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "partadvisor/cost_model.hpp"
#include "partadvisor/schema.hpp"

namespace partadvisor {

/// Concatenated per-table one-hot blocks, edge bits, then query frequencies.
using EncodedState = std::vector<double>;
/// Legal-action mask indexed by action id.
using ActionMask = std::vector<bool>;

class IllegalAction : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Action {
  enum class Kind { kReplicate, kPartitionBy, kActivateEdge, kDeactivateEdge };
  Kind kind = Kind::kReplicate;
  int id = 0;
  int table = -1;
  int key = -1;
  int edge = -1;
};

/// Fixed action layout for a schema: per table one replicate action followed by one
/// partition action per key, then one toggle per edge. The toggle activates an inactive
/// edge and deactivates an active one, so |A| = sum_i (1 + n_i) + m'.
class ActionSpace {
 public:
  explicit ActionSpace(const Schema& schema);

  int size() const { return size_; }
  int replicate_id(int table) const { return table_offset_[static_cast<std::size_t>(table)]; }
  int partition_id(int table, int key) const { return table_offset_[static_cast<std::size_t>(table)] + 1 + key; }
  int edge_action_id(int edge) const { return edge_offset_ + edge; }

  /// Resolves an id against the state it is applied to.
  Action resolve(int id, const PartitioningState& p) const;
  std::string describe(int id, const PartitioningState& p, const Schema& schema) const;

 private:
  std::vector<int> table_offset_;
  std::vector<int> slot_table_;
  int edge_offset_ = 0;
  int size_ = 0;
};

int encoded_size(const Schema& schema);
EncodedState encode(const PartitioningState& p, const WorkloadMix& mix, const Schema& schema);
/// Inverse of encode for well-formed vectors.
std::pair<PartitioningState, WorkloadMix> decode(std::span<const double> s, const Schema& schema);

ActionMask legal_actions(const PartitioningState& p, const Schema& schema, const ActionSpace& actions);
/// Throws IllegalAction when `action` is masked out in `p`.
PartitioningState apply(const PartitioningState& p, int action, const Schema& schema, const ActionSpace& actions);

/// Source of per-query costs c(P, q_j), scale factors already applied.
class CostBackend {
 public:
  virtual ~CostBackend() = default;
  virtual std::vector<double> query_costs(const PartitioningState& p) = 0;

  /// Limits for aborting slow queries: a query may be abandoned once its weighted cost
  /// alone proves the reward cannot reach `best_reward`.
  struct Budget {
    const WorkloadMix* mix = nullptr;
    double denominator = 0.0;
    double best_reward = -1.0;
  };
  /// Like query_costs but may abort; nullopt means a query timed out. Backends without
  /// timeout support evaluate everything.
  virtual std::optional<std::vector<double>> query_costs_within(const PartitioningState& p, const Budget&) {
    return query_costs(p);
  }
};

/// Offline reward source: c_m from the analytical cost model.
class CostModelBackend : public CostBackend {
 public:
  CostModelBackend(const Schema& schema, DeploymentConfig deploy) : schema_(&schema), deploy_(std::move(deploy)) {}
  std::vector<double> query_costs(const PartitioningState& p) override;
  std::int64_t evaluations() const { return evaluations_; }

 private:
  const Schema* schema_;
  DeploymentConfig deploy_;
  std::int64_t evaluations_ = 0;
};

/// sum_j f_j c_j
double weighted_cost(std::span<const double> costs, const WorkloadMix& mix);
/// -weighted / denominator; throws std::domain_error on a non-positive denominator.
double normalized_reward(double weighted, double denominator);

struct Transition {
  EncodedState state;
  int action = 0;
  double reward = 0.0;
  EncodedState next_state;
  ActionMask next_mask;
};

/// One MDP instance. reset() starts at P_0 and caches the P_0 denominator for the mix.
class Environment {
 public:
  Environment(const Schema& schema, CostBackend& backend);

  void reset(const WorkloadMix& mix);
  /// Per-episode timeouts; the step reward of an aborted partitioning is
  /// best_reward * timeout_reward_factor.
  void enable_timeouts(bool on, double timeout_reward_factor = 1.05) {
    timeouts_ = on;
    timeout_factor_ = timeout_reward_factor;
  }
  /// Seeds the episode's best known reward (e.g. from the offline recommendation).
  void offer_best_reward(double r) { best_reward_ = std::max(best_reward_, r); }

  struct Step {
    Transition transition;
    bool timed_out = false;
  };
  Step step(int action);

  const Schema& schema() const { return *schema_; }
  const ActionSpace& actions() const { return actions_; }
  const PartitioningState& state() const { return state_; }
  const WorkloadMix& mix() const { return mix_; }
  EncodedState observation() const { return encode(state_, mix_, *schema_); }
  ActionMask mask() const { return legal_actions(state_, *schema_, actions_); }
  double denominator() const { return denominator_; }
  double best_reward() const { return best_reward_; }
  /// Reward of an arbitrary state under the current mix (no timeouts).
  double evaluate(const PartitioningState& p);

 private:
  const Schema* schema_;
  CostBackend* backend_;
  ActionSpace actions_;
  PartitioningState state_;
  WorkloadMix mix_;
  double denominator_ = 0.0;
  double best_reward_ = -1.0;
  bool timeouts_ = false;
  double timeout_factor_ = 1.05;
};

}  // namespace partadvisor
