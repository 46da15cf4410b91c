#include "partadvisor/inference.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace partadvisor {

std::size_t best_index(std::span<const double> rewards) {
  if (rewards.empty()) throw std::invalid_argument("best_index: empty trajectory");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rewards.size(); ++i)
    if (rewards[i] > rewards[best]) best = i;
  return best;
}

Recommendation recommend(const DqnAgent& agent, const WorkloadMix& mix, const Schema& schema, CostBackend& scorer,
                         int t_max) {
  if (t_max < 0) throw std::invalid_argument("t_max must be non-negative");
  if (agent.input_size() != encoded_size(schema) || agent.action_count() != ActionSpace(schema).size())
    throw std::invalid_argument("agent dimensions do not match the schema");
  if (agent.schema_fingerprint() != schema.fingerprint())
    throw std::invalid_argument("agent was trained for a different schema");
  if (mix.size() != static_cast<std::size_t>(schema.query_count()))
    throw InputError("mix has " + std::to_string(mix.size()) + " frequencies, schema has " +
                     std::to_string(schema.query_count()) + " queries");

  Environment env(schema, scorer);
  env.reset(mix);
  Recommendation r;
  std::vector<PartitioningState> states{env.state()};
  r.trajectory_rewards.push_back(-1.0);
  for (int t = 0; t < t_max; ++t) {
    const int a = agent.act_greedy(env.observation(), env.mask());
    auto step = env.step(a);
    r.actions.push_back(a);
    r.trajectory_rewards.push_back(step.transition.reward);
    states.push_back(env.state());
  }
  const auto best = best_index(r.trajectory_rewards);
  r.best_step = static_cast<int>(best);
  r.trajectory_length = t_max;
  r.state = states[best];
  r.reward = env.evaluate(r.state);
  if (r.reward != r.trajectory_rewards[best])
    throw std::logic_error("scoring backend is not deterministic: reward changed on re-evaluation");
  return r;
}

nlohmann::json designs_json(const PartitioningState& p, const Schema& schema) {
  nlohmann::json designs = nlohmann::json::object();
  for (int t = 0; t < schema.table_count(); ++t) {
    const auto d = p.designs[static_cast<std::size_t>(t)];
    designs[schema.table(t).name] =
        d.is_replicated() ? nlohmann::json{{"replicated", true}}
                          : nlohmann::json{{"partitioned_by", schema.table(t).key_name(d.partition_key())}};
  }
  return designs;
}

nlohmann::json report_json(const Recommendation& r, const Schema& schema) {
  const auto designs = designs_json(r.state, schema);
  nlohmann::json edges = nlohmann::json::array();
  for (int e = 0; e < schema.edge_count(); ++e) {
    if (!r.state.is_active(e)) continue;
    const auto& ed = schema.edge(e);
    edges.push_back(schema.table(ed.left_table).name + "." + schema.table(ed.left_table).attributes[ed.left_attr].name + "=" +
                    schema.table(ed.right_table).name + "." + schema.table(ed.right_table).attributes[ed.right_attr].name);
  }
  nlohmann::json doc{{"designs", designs},
                     {"active_edges", edges},
                     {"expected_reward", r.reward},
                     {"best_step", r.best_step},
                     {"trajectory_length", r.trajectory_length}};
  doc["expert"] = r.expert >= 0 ? nlohmann::json(r.expert) : nlohmann::json(nullptr);
  if (r.reference_fallback) doc["reference_fallback"] = true;
  return doc;
}

std::string report_table(const Recommendation& r, const Schema& schema) {
  std::size_t width = 5;
  for (const auto& t : schema.tables()) width = std::max(width, t.name.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "table" << "  design\n";
  for (int t = 0; t < schema.table_count(); ++t)
  {
    const auto d = r.state.designs[static_cast<std::size_t>(t)];
    out << std::setw(static_cast<int>(width)) << schema.table(t).name << "  "
        << (d.is_replicated() ? std::string("replicated") : "partitioned by " + schema.table(t).key_name(d.partition_key()))
        << '\n';
  }
  out << "expected reward: " << std::setprecision(6) << r.reward << '\n';
  out << "best step: " << r.best_step << " of " << r.trajectory_length << '\n';
  if (r.expert >= 0) out << "expert: " << r.expert << '\n';
  return out.str();
}

}  // namespace partadvisor
