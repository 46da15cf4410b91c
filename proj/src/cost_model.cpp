#include "partadvisor/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace partadvisor {

void DeploymentConfig::validate() const {
  if (node_count < 1) throw std::invalid_argument("deploy.node_count must be >= 1");
  if (!(network_bandwidth > 0.0)) throw std::invalid_argument("deploy.network_bandwidth must be positive");
  if (!(scan_throughput > 0.0)) throw std::invalid_argument("deploy.scan_throughput must be positive");
  if (!(join_cpu_factor > 0.0)) throw std::invalid_argument("deploy.join_cpu_factor must be positive");
  for (const auto& [key, m] : skew)
    if (!(m >= 1.0)) throw std::invalid_argument("deploy.skew for " + key.first + "." + key.second + " must be >= 1");
}

double DeploymentConfig::skew_multiplier(const Table& table, int key) const {
  double m = 1.0;
  if (auto it = skew.find({table.name, table.key_name(key)}); it != skew.end()) m = it->second;
  const double distinct = table.key_distinct_values(key);
  if (distinct < node_count) m = std::max(m, node_count / std::max(distinct, 1.0));
  return m;
}

CostBreakdown QueryCostDetail::summarize() const {
  CostBreakdown c;
  for (double s : scans) c.scan_cost += s;
  double cpu = 0.0;
  for (const auto& j : joins) {
    c.shuffle_cost += j.shuffle;
    cpu += j.cpu;
  }
  c.join_cost = weight * cpu;
  c.total = c.scan_cost + c.shuffle_cost + c.join_cost;
  return c;
}

QueryCostDetail detail_query_cost(const PartitioningState& p, const Query& q, const Schema& schema,
                                  const DeploymentConfig& deploy) {
  if (p.designs.size() != schema.tables().size())
    throw std::invalid_argument("partitioning state does not match the schema");
  for (const auto& st : q.tables)
    if (st.table < 0 || st.table >= schema.table_count())
      throw std::invalid_argument("query " + std::to_string(q.id) + " references a table absent from the schema");

  const double n = deploy.node_count;
  const double bw = deploy.network_bandwidth;
  QueryCostDetail d;
  d.weight = q.weight;

  for (const auto& st : q.tables) {
    const auto& t = schema.table(st.table);
    const auto design = p.designs[static_cast<std::size_t>(st.table)];
    double scan = t.bytes() / deploy.scan_throughput;
    if (!design.is_replicated()) scan = scan / n * deploy.skew_multiplier(t, design.partition_key());
    d.scanned_tables.push_back(st.table);
    d.scans.push_back(scan);
  }

  for (int id : q.edges) {
    const auto& e = schema.edge(id);
    const auto& lt = schema.table(e.left_table);
    const auto& rt = schema.table(e.right_table);
    const auto ld = p.designs[static_cast<std::size_t>(e.left_table)];
    const auto rd = p.designs[static_cast<std::size_t>(e.right_table)];
    const double l_rows = static_cast<double>(lt.row_count) * q.selectivity_of(e.left_table);
    const double r_rows = static_cast<double>(rt.row_count) * q.selectivity_of(e.right_table);
    const double l_bytes = l_rows * static_cast<double>(lt.row_width);
    const double r_bytes = r_rows * static_cast<double>(rt.row_width);
    const double f = deploy.include_join_cpu ? deploy.join_cpu_factor : 0.0;

    JoinDetail j;
    j.edge = id;
    if (ld.is_replicated() || rd.is_replicated()) {
      // A replicated side is present on every node; the other side stays where it is.
      j.strategy = JoinStrategy::kReplicatedSide;
      const double l_work = ld.is_replicated() ? l_rows : l_rows / n;
      const double r_work = rd.is_replicated() ? r_rows : r_rows / n;
      j.cpu = f * (l_work + r_work);
    } else {
      const bool l_ok = ld.partition_key() == e.left_attr;
      const bool r_ok = rd.partition_key() == e.right_attr;
      if (l_ok && r_ok) {
        j.strategy = JoinStrategy::kColocated;
        j.cpu = f * (l_rows + r_rows) / n;
      } else {
        const double moved = (l_ok ? 0.0 : l_bytes) + (r_ok ? 0.0 : r_bytes);
        const double repartition = moved * (n - 1.0) / n / bw;
        const double broadcast = std::min(l_bytes, r_bytes) * (n - 1.0) / bw;
        if (repartition <= broadcast) {
          j.strategy = JoinStrategy::kRepartition;
          j.shuffle = repartition;
          j.cpu = f * (l_rows + r_rows) / n;
        } else {
          j.strategy = JoinStrategy::kBroadcast;
          j.shuffle = broadcast;
          const double small = l_bytes <= r_bytes ? l_rows : r_rows;
          const double large = l_bytes <= r_bytes ? r_rows : l_rows;
          j.cpu = f * (small + large / n);
        }
      }
    }
    d.joins.push_back(j);
  }
  return d;
}

CostBreakdown estimate_query_cost(const PartitioningState& p, const Query& q, const Schema& schema,
                                  const DeploymentConfig& deploy) {
  return detail_query_cost(p, q, schema, deploy).summarize();
}

double estimate_workload_cost(const PartitioningState& p, const WorkloadMix& mix, const Schema& schema,
                              const DeploymentConfig& deploy) {
  if (mix.size() != static_cast<std::size_t>(schema.query_count()))
    throw std::invalid_argument("workload mix length does not match the query count");
  double total = 0.0;
  for (int j = 0; j < schema.query_count(); ++j) {
    if (mix[static_cast<std::size_t>(j)] == 0.0) continue;
    total += mix[static_cast<std::size_t>(j)] * estimate_query_cost(p, schema.query(j), schema, deploy).total;
  }
  return total;
}

}  // namespace partadvisor
