#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "partadvisor/schema.hpp"

namespace partadvisor {

struct DeploymentConfig {
  int node_count = 4;
  /// Bytes per second across the interconnect.
  double network_bandwidth = 1.25e9;
  /// Bytes per second scanned by one node.
  double scan_throughput = 1e9;
  /// Cost units per joined input tuple.
  double join_cpu_factor = 1e-8;
  bool include_join_cpu = true;
  /// (table name, key name) -> multiplier >= 1 on the largest partition's share.
  std::map<std::pair<std::string, std::string>, double> skew;

  /// Throws std::invalid_argument on non-positive rates or multipliers below 1.
  void validate() const;
  /// Effective skew of partitioning `table` by `key`: the configured multiplier, or the
  /// imbalance forced by fewer distinct values than nodes, whichever is larger.
  double skew_multiplier(const Table& table, int key) const;
};

struct CostBreakdown {
  double scan_cost = 0.0;
  double shuffle_cost = 0.0;
  double join_cost = 0.0;
  double total = 0.0;
};

/// Per-join strategy chosen by the estimator.
enum class JoinStrategy { kColocated, kReplicatedSide, kRepartition, kBroadcast };

struct JoinDetail {
  int edge = 0;
  JoinStrategy strategy = JoinStrategy::kColocated;
  double shuffle = 0.0;
  double cpu = 0.0;
};

/// Itemized c_m(P, q). Table scans follow the query's table order, joins its edge order.
struct QueryCostDetail {
  std::vector<int> scanned_tables;
  std::vector<double> scans;
  std::vector<JoinDetail> joins;
  double weight = 1.0;

  /// Sums the items in a fixed order; every consumer goes through here.
  CostBreakdown summarize() const;
};

QueryCostDetail detail_query_cost(const PartitioningState& p, const Query& q, const Schema& schema,
                                  const DeploymentConfig& deploy);

CostBreakdown estimate_query_cost(const PartitioningState& p, const Query& q, const Schema& schema,
                                  const DeploymentConfig& deploy);

double estimate_workload_cost(const PartitioningState& p, const WorkloadMix& mix, const Schema& schema,
                              const DeploymentConfig& deploy);

}  // namespace partadvisor
