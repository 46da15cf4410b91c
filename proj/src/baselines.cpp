#include "partadvisor/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace partadvisor {

namespace {

std::vector<int> fact_tables(const Schema& schema) {
  std::vector<int> facts;
  for (int t = 0; t < schema.table_count(); ++t)
    if (schema.table(t).fact) facts.push_back(t);
  if (!facts.empty()) return facts;
  int largest = 0;
  for (int t = 1; t < schema.table_count(); ++t) {
    const auto& a = schema.table(t);
    const auto& b = schema.table(largest);
    if (a.row_count > b.row_count || (a.row_count == b.row_count && a.name < b.name)) largest = t;
  }
  return {largest};
}

// Number of queries using each edge.
std::vector<int> edge_usage(const Schema& schema) {
  std::vector<int> uses(static_cast<std::size_t>(schema.edge_count()), 0);
  for (const auto& q : schema.queries())
    for (int e : q.edges) ++uses[static_cast<std::size_t>(e)];
  return uses;
}

}  // namespace

PartitioningState heuristic_star(const Schema& schema, StarMode mode) {
  auto p = reference_partitioning(schema);
  const auto facts = fact_tables(schema);
  const auto uses = edge_usage(schema);
  std::vector<bool> is_fact(static_cast<std::size_t>(schema.table_count()), false);
  for (int f : facts) is_fact[static_cast<std::size_t>(f)] = true;
  std::vector<bool> pinned(static_cast<std::size_t>(schema.table_count()), false);

  for (int f : facts) {
    // Candidate dimensions with the best edge to each.
    struct Candidate {
      int dim;
      int edge;
      int joins;
    };
    std::vector<Candidate> candidates;
    for (const auto& e : schema.edges()) {
      if (!e.touches(f)) continue;
      const int d = e.other(f);
      if (is_fact[static_cast<std::size_t>(d)]) continue;
      // A dimension pinned by an earlier fact must already sit on this edge's attribute.
      if (pinned[static_cast<std::size_t>(d)] &&
          p.designs[static_cast<std::size_t>(d)] != TableDesign::partitioned_by(e.attr_for(d)))
        continue;
      auto it = std::find_if(candidates.begin(), candidates.end(), [&](const Candidate& c) { return c.dim == d; });
      if (it == candidates.end()) {
        candidates.push_back({d, e.id, 0});
        it = candidates.end() - 1;
      } else if (uses[static_cast<std::size_t>(e.id)] > uses[static_cast<std::size_t>(it->edge)]) {
        it->edge = e.id;
      }
    }
    if (candidates.empty())
      throw InputError("fact table '" + schema.table(f).name + "' has no join edge to a dimension table");
    for (auto& c : candidates) {
      for (const auto& q : schema.queries()) {
        bool joined = false;
        for (int e : q.edges) {
          const auto& ed = schema.edge(e);
          joined = joined || (ed.touches(f) && ed.other(f) == c.dim);
        }
        if (joined) ++c.joins;
      }
    }
    auto better = [&](const Candidate& a, const Candidate& b) {
      const auto& ta = schema.table(a.dim);
      const auto& tb = schema.table(b.dim);
      if (mode == StarMode::kMostFrequentJoin && a.joins != b.joins) return a.joins > b.joins;
      if (ta.row_count != tb.row_count) return ta.row_count > tb.row_count;
      if (mode == StarMode::kLargestDimension && a.joins != b.joins) return a.joins > b.joins;
      return ta.name < tb.name;
    };
    const auto chosen = *std::min_element(candidates.begin(), candidates.end(), better);
    const auto& edge = schema.edge(chosen.edge);
    p.designs[static_cast<std::size_t>(f)] = TableDesign::partitioned_by(edge.attr_for(f));
    p.designs[static_cast<std::size_t>(chosen.dim)] = TableDesign::partitioned_by(edge.attr_for(chosen.dim));
    pinned[static_cast<std::size_t>(f)] = true;
    pinned[static_cast<std::size_t>(chosen.dim)] = true;
  }
  return with_implied_edges(p, schema);
}

double default_small_threshold(const Schema& schema) {
  std::int64_t largest = 0;
  for (const auto& t : schema.tables()) largest = std::max(largest, t.row_count);
  return 0.05 * static_cast<double>(largest);
}

PartitioningState heuristic_general(const Schema& schema, GeneralMode mode, std::optional<double> small_threshold) {
  const double threshold = small_threshold.value_or(default_small_threshold(schema));
  if (!(threshold > 0.0)) throw std::invalid_argument("small-table threshold must be positive");
  auto small = [&](int t) { return static_cast<double>(schema.table(t).row_count) < threshold; };
  auto p = reference_partitioning(schema);

  if (mode == GeneralMode::kReplicateSmall) {
    for (int t = 0; t < schema.table_count(); ++t)
      if (small(t)) p.designs[static_cast<std::size_t>(t)] = TableDesign::replicated();
    return p;
  }

  std::vector<int> order(static_cast<std::size_t>(schema.edge_count()));
  for (int e = 0; e < schema.edge_count(); ++e) order[static_cast<std::size_t>(e)] = e;
  auto pair_names = [&](const JoinEdge& e) {
    auto a = schema.table(e.left_table).name;
    auto b = schema.table(e.right_table).name;
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  };
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    const auto& ex = schema.edge(x);
    const auto& ey = schema.edge(y);
    const auto rx = schema.table(ex.left_table).row_count + schema.table(ex.right_table).row_count;
    const auto ry = schema.table(ey.left_table).row_count + schema.table(ey.right_table).row_count;
    if (rx != ry) return rx > ry;
    return pair_names(ex) < pair_names(ey);
  });
  std::vector<bool> assigned(static_cast<std::size_t>(schema.table_count()), false);
  for (int id : order) {
    const auto& e = schema.edge(id);
    if (assigned[static_cast<std::size_t>(e.left_table)] || assigned[static_cast<std::size_t>(e.right_table)]) continue;
    if (small(e.left_table) || small(e.right_table)) continue;
    p.designs[static_cast<std::size_t>(e.left_table)] = TableDesign::partitioned_by(e.left_attr);
    p.designs[static_cast<std::size_t>(e.right_table)] = TableDesign::partitioned_by(e.right_attr);
    assigned[static_cast<std::size_t>(e.left_table)] = true;
    assigned[static_cast<std::size_t>(e.right_table)] = true;
  }
  for (int t = 0; t < schema.table_count(); ++t)
    if (!assigned[static_cast<std::size_t>(t)] && small(t)) p.designs[static_cast<std::size_t>(t)] = TableDesign::replicated();
  return with_implied_edges(p, schema);
}

std::vector<double> workload_costs(const std::vector<PartitioningState>& states, const WorkloadMix& mix,
                                   CostBackend& backend) {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(weighted_cost(backend.query_costs(s), mix));
  return out;
}

OracleResult brute_force_optimal(const Schema& schema, const WorkloadMix& mix, CostBackend& backend, std::size_t limit) {
  if (mix.size() != static_cast<std::size_t>(schema.query_count()))
    throw InputError("mix length does not match the query count");
  const auto states = enumerate_design_states(schema, limit);
  const auto costs = workload_costs(states, mix, backend);
  std::size_t best = 0;
  for (std::size_t i = 1; i < costs.size(); ++i)
    if (costs[i] < costs[best]) best = i;
  for (double c : costs)
    if (c < costs[best]) throw std::logic_error("oracle minimality check failed");
  return {states[best], costs[best], states.size()};
}

}  // namespace partadvisor
