#include <gtest/gtest.h>

#include <map>
#include <queue>
#include <random>
#include <set>

#include "partadvisor/mdp.hpp"
#include "support.hpp"

namespace partadvisor {
namespace {

using testing::load_data;
using testing::state_of;

// Lineorder by lo_custkey, customer by c_custkey, part by p_partkey, first edge active.
PartitioningState ssb_example(const Schema& s) { return state_of(s, {2, 1, 1}); }

TEST(ActionSpace, LayoutIsContiguousPerTableThenEdges) {
  auto s = load_data("ssb_simplified.json");
  ActionSpace a(s);
  EXPECT_EQ(a.size(), 4 + 2 + 2 + 2);
  EXPECT_EQ(a.replicate_id(0), 0);
  EXPECT_EQ(a.partition_id(0, 2), 3);
  EXPECT_EQ(a.replicate_id(1), 4);
  EXPECT_EQ(a.partition_id(2, 0), 7);
  EXPECT_EQ(a.edge_action_id(0), 8);
  EXPECT_EQ(a.edge_action_id(1), 9);
  auto p = reference_partitioning(s);
  for (int id = 0; id < a.size(); ++id) EXPECT_EQ(a.resolve(id, p).id, id);
  EXPECT_EQ(a.resolve(8, p).kind, Action::Kind::kActivateEdge);
  EXPECT_EQ(a.resolve(8, ssb_example(s)).kind, Action::Kind::kDeactivateEdge);
}

TEST(Encode, MatchesExampleLayout) {
  auto s = load_data("ssb_simplified.json");
  auto p = ssb_example(s);
  ASSERT_TRUE(is_valid(p, s));
  ASSERT_TRUE(p.is_active(0));
  ASSERT_FALSE(p.is_active(1));
  EXPECT_EQ(encoded_size(s), 12);
  const EncodedState expected{0, 0, 1, 0, 0, 1, 0, 1, 1, 0, 1, 1};
  EXPECT_EQ(encode(p, WorkloadMix::from_raw({1, 1}), s), expected);
}

TEST(Encode, ReplicatedSingleAttributeTable) {
  auto s = load_data("ssb_simplified.json");
  auto p = state_of(s, {1, 0, 1});
  auto e = encode(p, WorkloadMix::from_raw({0.5, 1}), s);
  EXPECT_EQ(e[4], 1.0);
  EXPECT_EQ(e[5], 0.0);
  EXPECT_EQ(e[10], 0.5);
}

TEST(Encode, RoundTripsEveryValidStateOfSmallSchemas) {
  for (const char* name : {"star3.json", "ssb_simplified.json", "two_tables.json"}) {
    auto s = load_data(name);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& d : enumerate_design_states(s)) {
      // Every subset of the edges the designs allow.
      const int m = s.edge_count();
      for (int mask = 0; mask < (1 << m); ++mask) {
        auto p = d;
        for (int e = 0; e < m; ++e) p.active_edges[static_cast<std::size_t>(e)] = (mask >> e) & 1;
        if (!is_valid(p, s)) continue;
        std::vector<double> raw;
        for (int j = 0; j < s.query_count(); ++j) raw.push_back(u(rng));
        auto mix = WorkloadMix::from_raw(raw);
        auto [p2, mix2] = decode(encode(p, mix, s), s);
        EXPECT_EQ(p2, p);
        EXPECT_EQ(mix2, mix);
      }
    }
  }
}

TEST(LegalActions, ExampleStateRestrictions) {
  auto s = load_data("ssb_simplified.json");
  ActionSpace a(s);
  auto mask = legal_actions(ssb_example(s), s, a);
  EXPECT_FALSE(mask[static_cast<std::size_t>(a.edge_action_id(1))]);  // conflicts with the active edge on lineorder
  EXPECT_FALSE(mask[static_cast<std::size_t>(a.replicate_id(0))]);
  EXPECT_FALSE(mask[static_cast<std::size_t>(a.replicate_id(1))]);
  EXPECT_FALSE(mask[static_cast<std::size_t>(a.partition_id(0, 0))]);
  EXPECT_FALSE(mask[static_cast<std::size_t>(a.partition_id(0, 2))]);
  EXPECT_TRUE(mask[static_cast<std::size_t>(a.edge_action_id(0))]);
  EXPECT_TRUE(mask[static_cast<std::size_t>(a.replicate_id(2))]);
}

TEST(LegalActions, ReferenceOfTwoTableSchema) {
  auto s = load_data("two_tables.json");
  ActionSpace a(s);
  auto p = reference_partitioning(s);
  auto mask = legal_actions(p, s, a);
  EXPECT_TRUE(mask[static_cast<std::size_t>(a.edge_action_id(0))]);
  EXPECT_EQ(a.resolve(a.edge_action_id(0), p).kind, Action::Kind::kActivateEdge);
  // Current designs are no-ops.
  EXPECT_FALSE(mask[static_cast<std::size_t>(a.partition_id(0, 0))]);
  EXPECT_FALSE(mask[static_cast<std::size_t>(a.partition_id(1, 0))]);
}

TEST(Apply, EdgeActivationAndDeactivation) {
  auto s = load_data("ssb_simplified.json");
  ActionSpace a(s);
  auto p = apply(reference_partitioning(s), a.edge_action_id(0), s, a);
  EXPECT_EQ(p.designs[0], TableDesign::partitioned_by(1));
  EXPECT_EQ(p.designs[1], TableDesign::partitioned_by(0));
  EXPECT_EQ(p.designs[2], TableDesign::partitioned_by(0));
  EXPECT_TRUE(p.is_active(0));
  EXPECT_FALSE(p.is_active(1));
  auto q = apply(p, a.edge_action_id(0), s, a);
  EXPECT_TRUE(q.same_designs(p));
  EXPECT_FALSE(q.is_active(0));
  EXPECT_THROW(apply(q, a.partition_id(0, 1), s, a), IllegalAction);
}

TEST(Apply, ChangesExactlyOneAspect) {
  auto s = load_data("snowflake4.json");
  ActionSpace a(s);
  std::mt19937_64 rng(17);
  auto p = reference_partitioning(s);
  for (int i = 0; i < 5000; ++i) {
    auto mask = legal_actions(p, s, a);
    std::vector<int> legal;
    for (int id = 0; id < a.size(); ++id)
      if (mask[static_cast<std::size_t>(id)]) legal.push_back(id);
    const int id = legal[rng() % legal.size()];
    auto next = apply(p, id, s, a);
    const auto act = a.resolve(id, p);
    int changed_designs = 0;
    for (int t = 0; t < s.table_count(); ++t) changed_designs += next.designs[static_cast<std::size_t>(t)] != p.designs[static_cast<std::size_t>(t)];
    if (act.kind == Action::Kind::kReplicate || act.kind == Action::Kind::kPartitionBy) {
      EXPECT_EQ(changed_designs, 1);
      EXPECT_EQ(next.active_edges, p.active_edges);
    } else if (act.kind == Action::Kind::kDeactivateEdge) {
      EXPECT_EQ(changed_designs, 0);
    }
    p = next;
  }
}

TEST(Closure, FuzzedLegalActionsStayValid) {
  auto s = load_data("snowflake4.json");
  ActionSpace a(s);
  std::mt19937_64 rng(2024);
  auto p = reference_partitioning(s);
  for (int i = 0; i < 100000; ++i) {
    if (i % 50 == 0) p = reference_partitioning(s);
    auto mask = legal_actions(p, s, a);
    std::vector<int> legal;
    for (int id = 0; id < a.size(); ++id)
      if (mask[static_cast<std::size_t>(id)]) legal.push_back(id);
    ASSERT_FALSE(legal.empty());
    p = apply(p, legal[rng() % legal.size()], s, a);
    ASSERT_TRUE(is_valid(p, s)) << "step " << i;
  }
}

TEST(Reachability, BreadthFirstSearchCoversAllValidStates) {
  for (const char* name : {"star3.json", "ssb_simplified.json", "snowflake4.json"}) {
    auto s = load_data(name);
    ActionSpace a(s);
    std::map<PartitioningState, int, decltype([](const PartitioningState& x, const PartitioningState& y) {
               return std::tie(x.designs, x.active_edges) < std::tie(y.designs, y.active_edges);
             })>
        depth;
    std::queue<PartitioningState> frontier;
    depth[reference_partitioning(s)] = 0;
    frontier.push(reference_partitioning(s));
    while (!frontier.empty()) {
      auto p = frontier.front();
      frontier.pop();
      auto mask = legal_actions(p, s, a);
      for (int id = 0; id < a.size(); ++id) {
        if (!mask[static_cast<std::size_t>(id)]) continue;
        auto n = apply(p, id, s, a);
        if (depth.emplace(n, depth[p] + 1).second) frontier.push(n);
      }
    }
    std::size_t valid = 0;
    for (const auto& d : enumerate_design_states(s)) {
      for (int mask = 0; mask < (1 << s.edge_count()); ++mask) {
        auto p = d;
        for (int e = 0; e < s.edge_count(); ++e) p.active_edges[static_cast<std::size_t>(e)] = (mask >> e) & 1;
        if (!is_valid(p, s)) continue;
        ++valid;
        auto it = depth.find(p);
        ASSERT_NE(it, depth.end()) << name;
        EXPECT_LE(it->second, s.table_count() + s.edge_count()) << name;
      }
    }
    EXPECT_EQ(depth.size(), valid) << name;
  }
}

class FixedCosts : public CostBackend {
 public:
  explicit FixedCosts(PartitioningState p0) : p0_(std::move(p0)) {}
  std::vector<double> query_costs(const PartitioningState& p) override {
    return p.same_designs(p0_) ? std::vector<double>{20, 40} : std::vector<double>{10, 30};
  }

 private:
  PartitioningState p0_;
};

TEST(Reward, HandComputedRatio) {
  auto s = load_data("ssb_simplified.json");
  FixedCosts backend(reference_partitioning(s));
  Environment env(s, backend);
  env.reset(WorkloadMix::uniform(2));
  EXPECT_EQ(env.denominator(), 60.0);
  EXPECT_EQ(env.evaluate(reference_partitioning(s)), -1.0);
  auto step = env.step(env.actions().edge_action_id(0));
  EXPECT_DOUBLE_EQ(step.transition.reward, -40.0 / 60.0);
  EXPECT_FALSE(step.timed_out);
  EXPECT_DOUBLE_EQ(env.best_reward(), -40.0 / 60.0);
}

TEST(Reward, ReferenceIsMinusOneAndCheaperStatesLieAbove) {
  auto s = load_data("star3.json");
  CostModelBackend backend(s, DeploymentConfig{});
  Environment env(s, backend);
  env.reset(WorkloadMix::from_raw({0.2, 1.0, 0.7}));
  EXPECT_EQ(env.evaluate(reference_partitioning(s)), -1.0);
  for (const auto& p : enumerate_design_states(s)) {
    const double r = env.evaluate(p);
    EXPECT_LT(r, 0.0);
    const double c = estimate_workload_cost(p, env.mix(), s, DeploymentConfig{});
    if (c < env.denominator()) {
      EXPECT_GT(r, -1.0);
    }
  }
}

class ZeroCosts : public CostBackend {
 public:
  std::vector<double> query_costs(const PartitioningState&) override { return {0.0}; }
};

TEST(Reward, ZeroDenominatorIsRejected) {
  auto s = load_data("two_tables.json");
  ZeroCosts backend;
  Environment env(s, backend);
  EXPECT_THROW(env.reset(WorkloadMix::uniform(1)), std::domain_error);
  EXPECT_THROW(normalized_reward(1.0, 0.0), std::domain_error);
}

class AlwaysTimesOut : public CostBackend {
 public:
  std::vector<double> query_costs(const PartitioningState&) override { return {5.0}; }
  std::optional<std::vector<double>> query_costs_within(const PartitioningState&, const Budget&) override {
    return std::nullopt;
  }
};

TEST(Reward, TimedOutStepUsesScaledBestReward) {
  auto s = load_data("two_tables.json");
  AlwaysTimesOut backend;
  Environment env(s, backend);
  env.enable_timeouts(true, 1.05);
  env.reset(WorkloadMix::uniform(1));
  auto step = env.step(env.actions().edge_action_id(0));
  EXPECT_TRUE(step.timed_out);
  EXPECT_DOUBLE_EQ(step.transition.reward, -1.05);
  EXPECT_EQ(env.best_reward(), -1.0);
}

TEST(Environment, EpisodeTransitionsChainAndRewardsAreNonPositive) {
  auto s = load_data("snowflake4.json");
  CostModelBackend backend(s, DeploymentConfig{});
  Environment env(s, backend);
  std::mt19937_64 rng(8);
  env.reset(WorkloadMix::uniform(4));
  EncodedState prev = env.observation();
  for (int t = 0; t < 200; ++t) {
    auto mask = env.mask();
    std::vector<int> legal;
    for (int id = 0; id < env.actions().size(); ++id)
      if (mask[static_cast<std::size_t>(id)]) legal.push_back(id);
    auto step = env.step(legal[rng() % legal.size()]);
    EXPECT_EQ(step.transition.state, prev);
    EXPECT_EQ(step.transition.next_state, env.observation());
    EXPECT_EQ(step.transition.next_mask, env.mask());
    EXPECT_LE(step.transition.reward, 0.0);
    prev = step.transition.next_state;
  }
  const auto d0 = env.state().designs[0];
  const int noop = d0.is_replicated() ? env.actions().replicate_id(0) : env.actions().partition_id(0, d0.partition_key());
  EXPECT_THROW(env.step(noop), IllegalAction);
}

}  // namespace
}  // namespace partadvisor
