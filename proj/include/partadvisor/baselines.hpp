#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "partadvisor/mdp.hpp"

namespace partadvisor {

enum class StarMode { kMostFrequentJoin, kLargestDimension };

/// Co-partitions every fact table with one adjacent dimension; other tables stay on their
/// primary key. Fact tables are those flagged `fact`, or else the largest table.
/// Throws InputError when a fact table has no joinable dimension.
PartitioningState heuristic_star(const Schema& schema, StarMode mode);

enum class GeneralMode { kReplicateSmall, kGreedyLargestPairs };

/// Row count below which a table counts as small: 5% of the largest table.
double default_small_threshold(const Schema& schema);

/// kReplicateSmall: small tables replicated, the rest on their primary key.
/// kGreedyLargestPairs: joined pairs of large tables co-partitioned largest first, small
/// leftovers replicated, other leftovers on their primary key.
PartitioningState heuristic_general(const Schema& schema, GeneralMode mode, std::optional<double> small_threshold = {});

struct OracleResult {
  PartitioningState state;
  /// sum_j f_j c_j of `state`.
  double cost = 0.0;
  std::size_t evaluated = 0;
};

/// Exhaustive minimum of the weighted workload cost over all design combinations; ties
/// go to the lexicographically smallest design vector. Throws std::invalid_argument when the
/// search space exceeds `limit`.
OracleResult brute_force_optimal(const Schema& schema, const WorkloadMix& mix, CostBackend& backend,
                                 std::size_t limit = 1'000'000);

/// Weighted cost of each state, in order.
std::vector<double> workload_costs(const std::vector<PartitioningState>& states, const WorkloadMix& mix,
                                   CostBackend& backend);

}  // namespace partadvisor
