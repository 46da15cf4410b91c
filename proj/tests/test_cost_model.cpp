#include <gtest/gtest.h>

#include <random>

#include "partadvisor/cost_model.hpp"
#include "support.hpp"

namespace partadvisor {
namespace {

using testing::load_data;
using testing::parse;

// fact: 10^6 rows x 100 B; dim: 10^4 rows x 100 B; both partitioned on a non-join key.
const char* kFactDim = R"({
  "tables": [
    {"name": "fact", "row_count": 1000000, "row_width": 100,
     "attributes": [{"name": "f_id", "distinct_values": 1000000}, {"name": "f_dim", "distinct_values": 10000}]},
    {"name": "dim", "row_count": 10000, "row_width": 100,
     "attributes": [{"name": "d_id", "distinct_values": 10000}, {"name": "d_attr", "distinct_values": 50}]}
  ],
  "join_predicates": [{"left": "fact.f_dim", "right": "dim.d_id"}],
  "queries": [{"id": 0, "tables": [{"name": "fact", "selectivity": 1.0}, {"name": "dim", "selectivity": 1.0}], "edges": [0]}]
})";

DeploymentConfig slow_net() {
  DeploymentConfig d;
  d.node_count = 4;
  d.network_bandwidth = 1e8;
  d.scan_throughput = 1e9;
  d.join_cpu_factor = 1e-8;
  return d;
}

TEST(EstimateQueryCost, HandCalculatedBroadcastJoin) {
  auto s = parse(kFactDim);
  // fact by f_id, dim by d_attr: neither side sits on the join key.
  PartitioningState p{{TableDesign::partitioned_by(0), TableDesign::partitioned_by(1)}, {false}};
  auto c = estimate_query_cost(p, s.query(0), s, slow_net());
  // scans: 1e8 B / 1e9 / 4 = 0.025 and 1e6 B / 1e9 / 4 = 0.00025
  EXPECT_NEAR(c.scan_cost, 0.02525, 1e-15);
  // repartition both: (1e8 + 1e6) * 3/4 / 1e8 = 0.7575; broadcast dim: 1e6 * 3 / 1e8 = 0.03
  EXPECT_NEAR(c.shuffle_cost, 0.03, 1e-15);
  // broadcast join: the small side is whole on every node, the large side is split
  // 1e-8 * (1e4 + 1e6 / 4) = 0.0026
  EXPECT_NEAR(c.join_cost, 0.0026, 1e-15);
  EXPECT_NEAR(c.total, 0.05785, 1e-15);
}

TEST(EstimateQueryCost, CoPartitionedJoinHasNoShuffle) {
  auto s = parse(kFactDim);
  PartitioningState p{{TableDesign::partitioned_by(1), TableDesign::partitioned_by(0)}, {true}};
  auto c = estimate_query_cost(p, s.query(0), s, slow_net());
  EXPECT_EQ(c.shuffle_cost, 0.0);
  EXPECT_NEAR(c.join_cost, 1e-8 * (1e6 + 1e4) / 4, 1e-15);
}

TEST(EstimateQueryCost, ReplicatedDimensionScansWholeAndNeverShuffles) {
  auto s = parse(kFactDim);
  PartitioningState p{{TableDesign::partitioned_by(0), TableDesign::replicated()}, {false}};
  auto d = detail_query_cost(p, s.query(0), s, slow_net());
  ASSERT_EQ(d.scans.size(), 2u);
  EXPECT_NEAR(d.scans[0], 1e8 / 1e9 / 4, 1e-15);
  EXPECT_NEAR(d.scans[1], 1e6 / 1e9, 1e-15);
  EXPECT_EQ(d.joins[0].strategy, JoinStrategy::kReplicatedSide);
  EXPECT_EQ(d.summarize().shuffle_cost, 0.0);
}

TEST(EstimateQueryCost, SkewMultipliesPartitionedScans) {
  auto s = parse(kFactDim);
  auto d = slow_net();
  d.skew[{"fact", "f_id"}] = 1.5;
  PartitioningState p{{TableDesign::partitioned_by(0), TableDesign::replicated()}, {false}};
  auto det = detail_query_cost(p, s.query(0), s, d);
  EXPECT_NEAR(det.scans[0], 1e8 / 1e9 / 4 * 1.5, 1e-15);
  // Fewer distinct values than nodes forces imbalance: 2 values on 4 nodes -> x2.
  auto s2 = parse(R"({"tables":[{"name":"t","row_count":1000,"row_width":10,
                        "attributes":[{"name":"a","distinct_values":1000},{"name":"flag","distinct_values":2}]}],
                      "queries":[{"id":0,"tables":[{"name":"t","selectivity":1}]}]})");
  EXPECT_DOUBLE_EQ(slow_net().skew_multiplier(s2.table(0), 1), 2.0);
  EXPECT_DOUBLE_EQ(slow_net().skew_multiplier(s2.table(0), 0), 1.0);
}

TEST(EstimateQueryCost, JoinCpuSwitch) {
  auto s = parse(kFactDim);
  auto d = slow_net();
  d.include_join_cpu = false;
  PartitioningState p{{TableDesign::partitioned_by(1), TableDesign::partitioned_by(0)}, {true}};
  EXPECT_EQ(estimate_query_cost(p, s.query(0), s, d).join_cost, 0.0);
}

TEST(EstimateQueryCost, TotalIsSumOfParts) {
  auto s = load_data("snowflake4.json");
  DeploymentConfig d;
  for (const auto& p : enumerate_design_states(s)) {
    for (const auto& q : s.queries()) {
      auto c = estimate_query_cost(p, q, s, d);
      EXPECT_EQ(c.total, c.scan_cost + c.shuffle_cost + c.join_cost);
      EXPECT_GT(c.total, 0.0);
    }
  }
}

TEST(EstimateWorkloadCost, ZeroAndSingletonMixes) {
  auto s = load_data("star3.json");
  DeploymentConfig d;
  auto p = reference_partitioning(s);
  EXPECT_EQ(estimate_workload_cost(p, WorkloadMix::from_raw({0, 0, 0}), s, d), 0.0);
  EXPECT_EQ(estimate_workload_cost(p, WorkloadMix::from_raw({0, 1, 0}), s, d), estimate_query_cost(p, s.query(1), s, d).total);
  EXPECT_THROW(estimate_workload_cost(p, WorkloadMix::from_raw({1, 1}), s, d), std::invalid_argument);
}

TEST(EstimateWorkloadCost, RaisingOneFrequencyNeverLowersItsShare) {
  auto s = load_data("star3.json");
  DeploymentConfig d;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  auto states = enumerate_design_states(s);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> raw{u(rng), u(rng), u(rng)};
    const auto& p = states[static_cast<std::size_t>(trial) % states.size()];
    const int j = trial % 3;
    auto share = [&](const std::vector<double>& r) {
      auto mix = WorkloadMix::from_raw(r);
      return mix[static_cast<std::size_t>(j)] * estimate_query_cost(p, s.query(j), s, d).total /
             estimate_workload_cost(p, mix, s, d);
    };
    auto doubled = raw;
    doubled[static_cast<std::size_t>(j)] *= 2.0;
    EXPECT_GE(share(doubled), share(raw) - 1e-12);
  }
}

TEST(CostModelProperties, MoreDataNeverCostsLess) {
  auto s = load_data("star3.json");
  DeploymentConfig d;
  std::vector<std::int64_t> rows;
  for (const auto& t : s.tables()) rows.push_back(t.row_count * 3);
  auto bigger = s.with_row_counts(rows);
  for (const auto& p : enumerate_design_states(s))
    for (int q = 0; q < s.query_count(); ++q)
      EXPECT_GE(estimate_query_cost(p, bigger.query(q), bigger, d).total, estimate_query_cost(p, s.query(q), s, d).total);
}

TEST(CostModelProperties, CoPartitioningBeatsNonJoinKeys) {
  auto s = parse(kFactDim);
  for (double bw : {1e7, 1e8, 1.25e9}) {
    auto d = slow_net();
    d.network_bandwidth = bw;
    PartitioningState co{{TableDesign::partitioned_by(1), TableDesign::partitioned_by(0)}, {true}};
    PartitioningState off{{TableDesign::partitioned_by(0), TableDesign::partitioned_by(1)}, {false}};
    EXPECT_LE(estimate_query_cost(co, s.query(0), s, d).total, estimate_query_cost(off, s.query(0), s, d).total);
  }
}

TEST(CostModelProperties, EdgeBitsDoNotChangeCosts) {
  auto s = load_data("ssb_simplified.json");
  DeploymentConfig d;
  PartitioningState a{{TableDesign::partitioned_by(1), TableDesign::partitioned_by(0), TableDesign::partitioned_by(0)},
                      {true, false}};
  auto b = a;
  b.active_edges = {false, false};
  for (const auto& q : s.queries())
    EXPECT_EQ(estimate_query_cost(a, q, s, d).total, estimate_query_cost(b, q, s, d).total);
}

TEST(DeploymentConfig, RejectsNonPositiveRates) {
  DeploymentConfig d;
  d.network_bandwidth = 0;
  EXPECT_THROW(d.validate(), std::invalid_argument);
  DeploymentConfig e;
  e.skew[{"t", "a"}] = 0.5;
  EXPECT_THROW(e.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace partadvisor
