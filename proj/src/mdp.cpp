#include "partadvisor/mdp.hpp"

#include <algorithm>
#include <cmath>

namespace partadvisor {

ActionSpace::ActionSpace(const Schema& schema) {
  int next = 0;
  for (int t = 0; t < schema.table_count(); ++t) {
    table_offset_.push_back(next);
    for (int s = 0; s <= schema.table(t).key_count(); ++s) slot_table_.push_back(t);
    next += 1 + schema.table(t).key_count();
  }
  edge_offset_ = next;
  size_ = next + schema.edge_count();
}

Action ActionSpace::resolve(int id, const PartitioningState& p) const {
  if (id < 0 || id >= size_) throw IllegalAction("action id " + std::to_string(id) + " out of range");
  Action a;
  a.id = id;
  if (id >= edge_offset_) {
    a.edge = id - edge_offset_;
    a.kind = p.is_active(a.edge) ? Action::Kind::kDeactivateEdge : Action::Kind::kActivateEdge;
    return a;
  }
  a.table = slot_table_[static_cast<std::size_t>(id)];
  const int slot = id - table_offset_[static_cast<std::size_t>(a.table)];
  if (slot == 0) {
    a.kind = Action::Kind::kReplicate;
  } else {
    a.kind = Action::Kind::kPartitionBy;
    a.key = slot - 1;
  }
  return a;
}

std::string ActionSpace::describe(int id, const PartitioningState& p, const Schema& schema) const {
  const auto a = resolve(id, p);
  switch (a.kind) {
    case Action::Kind::kReplicate:
      return "replicate " + schema.table(a.table).name;
    case Action::Kind::kPartitionBy:
      return "partition " + schema.table(a.table).name + " by " + schema.table(a.table).key_name(a.key);
    case Action::Kind::kActivateEdge:
      return "activate edge " + std::to_string(a.edge);
    case Action::Kind::kDeactivateEdge:
      return "deactivate edge " + std::to_string(a.edge);
  }
  return {};
}

int encoded_size(const Schema& schema) {
  int n = 0;
  for (const auto& t : schema.tables()) n += 1 + t.key_count();
  return n + schema.edge_count() + schema.query_count();
}

EncodedState encode(const PartitioningState& p, const WorkloadMix& mix, const Schema& schema) {
  EncodedState s(static_cast<std::size_t>(encoded_size(schema)), 0.0);
  std::size_t pos = 0;
  for (int t = 0; t < schema.table_count(); ++t) {
    s[pos + static_cast<std::size_t>(p.designs[static_cast<std::size_t>(t)].slot())] = 1.0;
    pos += 1 + static_cast<std::size_t>(schema.table(t).key_count());
  }
  for (int e = 0; e < schema.edge_count(); ++e) s[pos++] = p.is_active(e) ? 1.0 : 0.0;
  for (std::size_t j = 0; j < mix.size(); ++j) s[pos++] = mix[j];
  return s;
}

std::pair<PartitioningState, WorkloadMix> decode(std::span<const double> s, const Schema& schema) {
  if (s.size() != static_cast<std::size_t>(encoded_size(schema))) throw std::invalid_argument("encoded state has the wrong length");
  PartitioningState p;
  std::size_t pos = 0;
  for (const auto& t : schema.tables()) {
    const auto block = s.subspan(pos, 1 + static_cast<std::size_t>(t.key_count()));
    const auto hot = std::max_element(block.begin(), block.end()) - block.begin();
    p.designs.push_back(TableDesign::from_slot(static_cast<int>(hot)));
    pos += block.size();
  }
  for (int e = 0; e < schema.edge_count(); ++e) p.active_edges.push_back(s[pos++] > 0.5);
  std::vector<double> f(s.begin() + static_cast<std::ptrdiff_t>(pos), s.end());
  return {std::move(p), WorkloadMix::from_raw(std::move(f))};
}

namespace {

// Attribute required on `table` by any active edge, or -1.
int pinned_attribute(const PartitioningState& p, const Schema& schema, int table) {
  for (const auto& e : schema.edges())
    if (p.is_active(e.id) && e.touches(table)) return e.attr_for(table);
  return -1;
}

bool activation_conflicts(const PartitioningState& p, const Schema& schema, const JoinEdge& edge) {
  for (int t : {edge.left_table, edge.right_table}) {
    const int pinned = pinned_attribute(p, schema, t);
    if (pinned >= 0 && pinned != edge.attr_for(t)) return true;
  }
  return false;
}

}  // namespace

ActionMask legal_actions(const PartitioningState& p, const Schema& schema, const ActionSpace& actions) {
  ActionMask mask(static_cast<std::size_t>(actions.size()), false);
  for (int t = 0; t < schema.table_count(); ++t) {
    // Any change to a table pinned by an active edge would break that edge.
    const bool pinned = pinned_attribute(p, schema, t) >= 0;
    if (pinned) continue;
    const auto current = p.designs[static_cast<std::size_t>(t)];
    mask[static_cast<std::size_t>(actions.replicate_id(t))] = !current.is_replicated();
    for (int k = 0; k < schema.table(t).key_count(); ++k)
      mask[static_cast<std::size_t>(actions.partition_id(t, k))] = current != TableDesign::partitioned_by(k);
  }
  for (const auto& e : schema.edges()) {
    mask[static_cast<std::size_t>(actions.edge_action_id(e.id))] = p.is_active(e.id) || !activation_conflicts(p, schema, e);
  }
  return mask;
}

PartitioningState apply(const PartitioningState& p, int action, const Schema& schema, const ActionSpace& actions) {
  const auto mask = legal_actions(p, schema, actions);
  if (action < 0 || action >= actions.size() || !mask[static_cast<std::size_t>(action)])
    throw IllegalAction("action " + std::to_string(action) + " is not legal in this state");
  const auto a = actions.resolve(action, p);
  PartitioningState next = p;
  switch (a.kind) {
    case Action::Kind::kReplicate:
      next.designs[static_cast<std::size_t>(a.table)] = TableDesign::replicated();
      break;
    case Action::Kind::kPartitionBy:
      next.designs[static_cast<std::size_t>(a.table)] = TableDesign::partitioned_by(a.key);
      break;
    case Action::Kind::kActivateEdge: {
      const auto& e = schema.edge(a.edge);
      next.designs[static_cast<std::size_t>(e.left_table)] = TableDesign::partitioned_by(e.left_attr);
      next.designs[static_cast<std::size_t>(e.right_table)] = TableDesign::partitioned_by(e.right_attr);
      next.active_edges[static_cast<std::size_t>(a.edge)] = true;
      break;
    }
    case Action::Kind::kDeactivateEdge:
      next.active_edges[static_cast<std::size_t>(a.edge)] = false;
      break;
  }
  return next;
}

std::vector<double> CostModelBackend::query_costs(const PartitioningState& p) {
  ++evaluations_;
  std::vector<double> c;
  c.reserve(schema_->queries().size());
  for (const auto& q : schema_->queries()) c.push_back(estimate_query_cost(p, q, *schema_, deploy_).total);
  return c;
}

double weighted_cost(std::span<const double> costs, const WorkloadMix& mix) {
  if (costs.size() != mix.size()) throw std::invalid_argument("workload mix length does not match the query count");
  double w = 0.0;
  for (std::size_t j = 0; j < costs.size(); ++j)
    if (mix[j] != 0.0) w += mix[j] * costs[j];
  return w;
}

double normalized_reward(double weighted, double denominator) {
  if (!(denominator > 0.0)) throw std::domain_error("reference partitioning has zero weighted cost");
  if (weighted == denominator) return -1.0;
  return -weighted / denominator;
}

Environment::Environment(const Schema& schema, CostBackend& backend)
    : schema_(&schema), backend_(&backend), actions_(schema), state_(reference_partitioning(schema)) {}

void Environment::reset(const WorkloadMix& mix) {
  if (mix.size() != static_cast<std::size_t>(schema_->query_count()))
    throw std::invalid_argument("workload mix length does not match the query count");
  mix_ = mix;
  state_ = reference_partitioning(*schema_);
  denominator_ = weighted_cost(backend_->query_costs(state_), mix_);
  if (!(denominator_ > 0.0)) throw std::domain_error("reference partitioning has zero weighted cost for this mix");
  best_reward_ = -1.0;
}

Environment::Step Environment::step(int action) {
  Step out;
  out.transition.state = observation();
  out.transition.action = action;
  state_ = apply(state_, action, *schema_, actions_);
  if (timeouts_) {
    auto costs = backend_->query_costs_within(state_, CostBackend::Budget{&mix_, denominator_, best_reward_});
    if (costs) {
      out.transition.reward = normalized_reward(weighted_cost(*costs, mix_), denominator_);
    } else {
      out.timed_out = true;
      out.transition.reward = best_reward_ * timeout_factor_;
    }
  } else {
    out.transition.reward = normalized_reward(weighted_cost(backend_->query_costs(state_), mix_), denominator_);
  }
  if (!out.timed_out) best_reward_ = std::max(best_reward_, out.transition.reward);
  out.transition.next_state = observation();
  out.transition.next_mask = mask();
  return out;
}

double Environment::evaluate(const PartitioningState& p) {
  return normalized_reward(weighted_cost(backend_->query_costs(p), mix_), denominator_);
}

}  // namespace partadvisor
