#include <gtest/gtest.h>

#include <random>

#include "partadvisor/cluster_sim.hpp"
#include "support.hpp"

namespace partadvisor {
namespace {

using testing::load_data;
using testing::parse;
using testing::state_of;

TEST(SimulateQuery, NeutralProfileEqualsCostModelExactly) {
  auto s = load_data("snowflake4.json");
  auto db = SampledDatabase::full(s);
  SimProfile neutral;
  neutral.deploy.network_bandwidth = 3e8;
  ASSERT_TRUE(neutral.is_neutral());
  auto states = enumerate_design_states(s);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto& p = states[rng() % states.size()];
    const auto& q = s.query(static_cast<int>(rng() % static_cast<std::uint64_t>(s.query_count())));
    ASSERT_EQ(simulate_query(p, q, db, neutral, 99), estimate_query_cost(p, q, s, neutral.deploy).total);
  }
}

TEST(SimulateQuery, NoiseIsDeterministicAndBounded) {
  auto s = load_data("star3.json");
  auto db = SampledDatabase::full(s);
  SimProfile noisy;
  noisy.noise_fraction = 0.05;
  SimProfile neutral;
  bool any_difference = false;
  for (const auto& p : enumerate_design_states(s)) {
    for (const auto& q : s.queries()) {
      const double a = simulate_query(p, q, db, noisy, 5);
      EXPECT_EQ(a, simulate_query(p, q, db, noisy, 5));
      const double base = simulate_query(p, q, db, neutral, 5);
      EXPECT_LE(std::abs(a - base), 0.05 * base + 1e-15);
      any_difference = any_difference || a != base;
    }
  }
  EXPECT_TRUE(any_difference);
}

TEST(SimulateQuery, ShuffleLatencyAddsPerShufflingJoin) {
  auto s = load_data("star3.json");
  auto db = SampledDatabase::full(s);
  // sales by s_id, customer by c_nation, dates by d_year: both joins of query 2 shuffle.
  auto p = state_of(s, {1, 2, 2});
  SimProfile neutral;
  SimProfile latency;
  latency.shuffle_latency = 0.5;
  const double base = simulate_query(p, s.query(2), db, neutral, 1);
  EXPECT_GE(simulate_query(p, s.query(2), db, latency, 1), base + 1.0);
  EXPECT_NEAR(simulate_query(p, s.query(2), db, latency, 1), base + 1.0, 1e-12);
}

TEST(SimulateQuery, ScanExponentAndReplicationPenalty) {
  auto s = parse(R"({"tables":[{"name":"t","row_count":1000000,"row_width":100,
                       "attributes":[{"name":"a","distinct_values":1000000}]}],
                     "queries":[{"id":0,"tables":[{"name":"t","selectivity":1}]}]})");
  auto db = SampledDatabase::full(s);
  SimProfile prof;
  prof.scan_exponent["t"] = 1.1;
  auto p = reference_partitioning(s);
  const double per_node = 1e8 / 4;
  const double expected = 1e8 / 1e9 / 4 * std::pow(per_node, 0.1);
  EXPECT_NEAR(simulate_query(p, s.query(0), db, prof, 0), expected, expected * 1e-12);
  SimProfile rep;
  rep.replication_scan_penalty = 1.5;
  PartitioningState r{{TableDesign::replicated()}, {}};
  EXPECT_NEAR(simulate_query(r, s.query(0), db, rep, 0), 1e8 / 1e9 * 1.5, 1e-15);
}

TEST(RepartitionTime, HandCalculatedReplicationAndRepartition) {
  auto s = parse(R"({"tables":[{"name":"t","row_count":1000000,"row_width":100,
                       "attributes":[{"name":"a","distinct_values":1000000},{"name":"b","distinct_values":10}]}]})");
  auto db = SampledDatabase::full(s);
  DeploymentConfig d;
  d.node_count = 4;
  d.network_bandwidth = 1e8;
  // 1e8 bytes: replicate ships 3 copies, repartition ships 3/4 of the table.
  EXPECT_NEAR(repartition_time(db, d, 0, TableDesign::partitioned_by(0), TableDesign::replicated()), 3.0, 1e-12);
  EXPECT_NEAR(repartition_time(db, d, 0, TableDesign::partitioned_by(0), TableDesign::partitioned_by(1)), 0.75, 1e-12);
  EXPECT_EQ(repartition_time(db, d, 0, TableDesign::partitioned_by(0), TableDesign::partitioned_by(0)), 0.0);
}

TEST(ClusterSimulator, TracksDeployedDesignsAndCounters) {
  auto s = load_data("two_tables.json");
  ClusterSimulator c(SampledDatabase::full(s), SimProfile{}, 3);
  EXPECT_EQ(c.deployed(), reference_partitioning(s).designs);
  EXPECT_EQ(c.repartition_table(0, TableDesign::partitioned_by(0)), 0.0);
  EXPECT_EQ(c.repartitions(), 0);
  EXPECT_GT(c.repartition_table(1, TableDesign::replicated()), 0.0);
  EXPECT_EQ(c.repartitions(), 1);
  EXPECT_EQ(c.deployed()[1], TableDesign::replicated());
  auto p = reference_partitioning(s);
  EXPECT_THROW(c.run_query(p, 0), std::logic_error);
  p.designs[1] = TableDesign::replicated();
  EXPECT_GT(c.run_query(p, 0), 0.0);
  EXPECT_EQ(c.executed_queries(), 1);
}

TEST(SampledDatabase, EffectiveRowsRoundUpWithFloorAndCap) {
  auto s = parse(R"({"tables":[{"name":"big","row_count":1001,"row_width":1,"attributes":[{"name":"a","distinct_values":5}]},
                               {"name":"tiny","row_count":40,"row_width":1,"attributes":[{"name":"a","distinct_values":5}]}]})");
  auto db = SampledDatabase::sample(s, 0.5, 100);
  EXPECT_EQ(db.effective_rows(0), 501);
  EXPECT_EQ(db.effective_rows(1), 40);
  auto db2 = SampledDatabase::sample(s, 0.01, 100);
  EXPECT_EQ(db2.effective_rows(0), 100);
  EXPECT_THROW(SampledDatabase::sample(s, 0.0, 100), std::invalid_argument);
}

TEST(ScaleFactors, RateOneGivesOne) {
  auto s = load_data("star3.json");
  auto full = SampledDatabase::full(s);
  auto sample = SampledDatabase::sample(s, 1.0, 100);
  for (double f : compute_scale_factors(reference_partitioning(s), full, sample, SimProfile{}, 1)) EXPECT_EQ(f, 1.0);
}

TEST(ScaleFactors, LinearScanScalesByInverseRate) {
  auto s = parse(R"({"tables":[{"name":"t","row_count":1000000,"row_width":100,
                       "attributes":[{"name":"a","distinct_values":1000000}]}],
                     "queries":[{"id":0,"tables":[{"name":"t","selectivity":0.3}]}]})");
  auto f = compute_scale_factors(reference_partitioning(s), SampledDatabase::full(s), SampledDatabase::sample(s, 0.1, 100),
                                 SimProfile{}, 1);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_NEAR(f[0], 10.0, 1e-9);
}

TEST(ScaleFactors, SamplingNeverYieldsFactorsBelowOne) {
  auto s = load_data("snowflake4.json");
  auto f = compute_scale_factors(reference_partitioning(s), SampledDatabase::full(s), SampledDatabase::sample(s, 0.05, 100),
                                 SimProfile{}, 1);
  for (double x : f) EXPECT_GE(x, 1.0);
}

TEST(Microbenchmark, NetworkSpeedDecidesBetweenReplicatingAndPartitioningB) {
  auto s = load_data("microbenchmark.json");
  auto db = SampledDatabase::full(s);
  auto mix = WorkloadMix::uniform(2);
  // A co-partitioned with C; B either replicated or on its key.
  auto replicate_b = state_of(s, {3, 0, 1});
  auto partition_b = state_of(s, {3, 1, 1});
  auto workload = [&](const PartitioningState& p, double bw) {
    SimProfile prof;
    prof.deploy.network_bandwidth = bw;
    double total = 0.0;
    for (int j = 0; j < 2; ++j) total += mix[static_cast<std::size_t>(j)] * simulate_query(p, s.query(j), db, prof, 0);
    return total;
  };
  EXPECT_LT(workload(replicate_b, 7.5e7), workload(partition_b, 7.5e7));
  EXPECT_LT(workload(partition_b, 1.25e9), workload(replicate_b, 1.25e9));
}

TEST(CheckSampling, FullRateAgreesPerfectly) {
  auto s = load_data("star3.json");
  auto full = SampledDatabase::full(s);
  auto sample = SampledDatabase::sample(s, 1.0, 100);
  auto states = enumerate_design_states(s);
  auto scale = compute_scale_factors(reference_partitioning(s), full, sample, SimProfile{}, 1);
  auto check = check_sampling(states, WorkloadMix::uniform(3), full, sample, SimProfile{}, scale, 1);
  EXPECT_EQ(check.pair_agreement, 1.0);
  EXPECT_TRUE(check.same_best);
}

TEST(SimProfile, RejectsOutOfRangeKnobs) {
  SimProfile p;
  p.noise_fraction = 0.2;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  SimProfile q;
  q.scan_exponent["t"] = 0.0;
  EXPECT_THROW(q.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace partadvisor
