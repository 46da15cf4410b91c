#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "partadvisor/cost_model.hpp"
#include "partadvisor/schema.hpp"

namespace partadvisor {

/// Execution backend characteristics. With neutral knobs and zero noise the simulated
/// runtime is exactly the cost model estimate.
struct SimProfile {
  DeploymentConfig deploy;
  /// Per-table scan nonlinearity; scan time grows with (bytes per node)^exponent.
  std::map<std::string, double> scan_exponent;
  /// Seconds added to every join that moves data over the network.
  double shuffle_latency = 0.0;
  /// Multiplier on the scan time of replicated tables.
  double replication_scan_penalty = 1.0;
  /// Relative runtime noise in [0, 0.05], deterministic per (seed, query, relevant designs).
  double noise_fraction = 0.0;

  void validate() const;
  bool is_neutral() const;
};

/// A schema whose row counts are the sampled (effective) sizes of a base schema.
class SampledDatabase {
 public:
  /// Full dataset: rate 1 for every table.
  static SampledDatabase full(const Schema& base);
  /// effective rows = ceil(rate * rows), raised to `min_rows` but never above the full size.
  static SampledDatabase sample(const Schema& base, const std::vector<double>& rates, std::int64_t min_rows);
  static SampledDatabase sample(const Schema& base, double rate, std::int64_t min_rows);

  const Schema& schema() const { return schema_; }
  const std::vector<double>& rates() const { return rates_; }
  std::int64_t effective_rows(int table) const { return schema_.table(table).row_count; }

 private:
  Schema schema_;
  std::vector<double> rates_;
};

double simulate_query(const PartitioningState& p, const Query& q, const SampledDatabase& db, const SimProfile& profile,
                      std::uint64_t seed);

/// Seconds to move `table` of `db` into `design`: repartitioning ships (n-1)/n of its bytes,
/// replicating ships (n-1) copies. Zero when the design is unchanged.
double repartition_time(const SampledDatabase& db, const DeploymentConfig& deploy, int table, TableDesign from,
                        TableDesign to);

/// Stateful cluster: tracks the deployed design of every table (P_actual) and counts work.
class ClusterSimulator {
 public:
  ClusterSimulator(SampledDatabase db, SimProfile profile, std::uint64_t seed);

  const SampledDatabase& database() const { return db_; }
  const SimProfile& profile() const { return profile_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<TableDesign>& deployed() const { return deployed_; }
  /// Swaps in a database over the same tables (e.g. with more queries), keeping the
  /// deployed designs and counters.
  void replace_database(SampledDatabase db);

  /// Moves `table` into `design`; a no-op returning 0 if it is already deployed that way.
  double repartition_table(int table, TableDesign design);
  /// Runs query `q` on the deployed designs. Every table the query scans must already be
  /// deployed as in `p`; throws std::logic_error otherwise.
  double run_query(const PartitioningState& p, int q);

  std::int64_t executed_queries() const { return executed_queries_; }
  std::int64_t repartitions() const { return repartitions_; }
  double repartition_seconds() const { return repartition_seconds_; }
  double query_seconds() const { return query_seconds_; }

 private:
  SampledDatabase db_;
  SimProfile profile_;
  std::uint64_t seed_;
  std::vector<TableDesign> deployed_;
  std::int64_t executed_queries_ = 0;
  std::int64_t repartitions_ = 0;
  double repartition_seconds_ = 0.0;
  double query_seconds_ = 0.0;
};

/// s_i = c_full(P_offline, q_i) / c_sample(P_offline, q_i). Throws std::domain_error on a
/// zero sample runtime.
std::vector<double> compute_scale_factors(const PartitioningState& p_offline, const SampledDatabase& full,
                                          const SampledDatabase& sample, const SimProfile& profile,
                                          std::uint64_t seed);

struct SamplingCheck {
  std::vector<double> full_runtimes;
  std::vector<double> weighted_sample_runtimes;
  /// Fraction of partitioning pairs ordered the same way by both measurements.
  double pair_agreement = 1.0;
  /// Whether the sample and the full dataset pick the same fastest partitioning.
  bool same_best = true;
};

/// Diagnostic for choosing the sampling rate: compares workload runtimes of candidate
/// partitionings on the full data against their scaled sample runtimes.
SamplingCheck check_sampling(const std::vector<PartitioningState>& candidates, const WorkloadMix& mix,
                             const SampledDatabase& full, const SampledDatabase& sample, const SimProfile& profile,
                             const std::vector<double>& scale_factors, std::uint64_t seed);

}  // namespace partadvisor
