#include <gtest/gtest.h>

#include "partadvisor/inference.hpp"
#include "partadvisor/training.hpp"
#include "support.hpp"

namespace partadvisor {
namespace {

using testing::load_data;

TEST(BestIndex, FirstMaximum) {
  const std::vector<double> r{-1, -0.8, -0.6, -0.7};
  EXPECT_EQ(best_index(r), 2u);
  const std::vector<double> tie{-1, -0.5, -0.7, -0.5};
  EXPECT_EQ(best_index(tie), 1u);
}

// With every weight zero all Q-values tie, so the greedy policy always takes the lowest
// legal action id. Replays that policy directly on the environment.
TEST(Recommend, MatchesIndependentRolloutOfLowestLegalAction) {
  auto s = load_data("snowflake4.json");
  DqnAgent agent(encoded_size(s), ActionSpace(s).size(), AgentConfig{{4}}, 1, s.fingerprint());
  for (auto& v : agent.online().parameters()) v = 0.0;
  CostModelBackend model(s, DeploymentConfig{});
  const auto mix = WorkloadMix::from_raw({1, 0.3, 0.5, 0.2});
  auto rec = recommend(agent, mix, s, model, 12);

  Environment env(s, model);
  env.reset(mix);
  std::vector<double> rewards{-1.0};
  std::vector<PartitioningState> states{env.state()};
  for (int t = 0; t < 12; ++t) {
    auto mask = env.mask();
    int a = 0;
    while (!mask[static_cast<std::size_t>(a)]) ++a;
    EXPECT_EQ(rec.actions[static_cast<std::size_t>(t)], a);
    rewards.push_back(env.step(a).transition.reward);
    states.push_back(env.state());
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < rewards.size(); ++i)
    if (rewards[i] > rewards[best]) best = i;
  EXPECT_EQ(rec.trajectory_rewards, rewards);
  EXPECT_EQ(rec.best_step, static_cast<int>(best));
  EXPECT_EQ(rec.state, states[best]);
  EXPECT_EQ(rec.reward, rewards[best]);
  EXPECT_EQ(rec.trajectory_length, 12);
  EXPECT_EQ(rec.expert, -1);
}

TEST(Recommend, DeterministicValidAndReEvaluated) {
  auto s = load_data("star3.json");
  TrainConfig c;
  c.agent.hidden_layers = {16, 8};
  c.episodes = 10;
  c.t_max = 8;
  auto trained = train_offline(s, DeploymentConfig{}, c);
  CostModelBackend model(s, DeploymentConfig{});
  const auto mix = WorkloadMix::from_raw({0.2, 1, 0.4});
  auto a = recommend(trained.agent, mix, s, model, 8);
  auto b = recommend(trained.agent, mix, s, model, 8);
  EXPECT_EQ(a.state, b.state);
  EXPECT_EQ(a.trajectory_rewards, b.trajectory_rewards);
  EXPECT_TRUE(is_valid(a.state, s));
  Environment env(s, model);
  env.reset(mix);
  EXPECT_EQ(a.reward, env.evaluate(a.state));
  EXPECT_GE(a.reward, -1.0);
}

TEST(Recommend, RejectsMismatchedAgentOrMix) {
  auto s = load_data("star3.json");
  auto other = load_data("two_tables.json");
  CostModelBackend model(s, DeploymentConfig{});
  DqnAgent wrong_shape(encoded_size(other), ActionSpace(other).size(), AgentConfig{{4}}, 1, s.fingerprint());
  EXPECT_THROW(recommend(wrong_shape, WorkloadMix::uniform(3), s, model, 5), std::invalid_argument);
  DqnAgent wrong_schema(encoded_size(s), ActionSpace(s).size(), AgentConfig{{4}}, 1, other.fingerprint());
  EXPECT_THROW(recommend(wrong_schema, WorkloadMix::uniform(3), s, model, 5), std::invalid_argument);
  DqnAgent ok(encoded_size(s), ActionSpace(s).size(), AgentConfig{{4}}, 1, s.fingerprint());
  EXPECT_THROW(recommend(ok, WorkloadMix::uniform(2), s, model, 5), InputError);
}

TEST(Report, JsonAndTableDescribeTheState) {
  auto s = load_data("star3.json");
  Recommendation r;
  r.state = testing::state_of(s, {2, 1, 0});
  r.reward = -0.42;
  r.best_step = 3;
  r.trajectory_length = 10;
  auto j = report_json(r, s);
  EXPECT_EQ(j["designs"]["sales"]["partitioned_by"], "s_cust");
  EXPECT_EQ(j["designs"]["dates"]["replicated"], true);
  EXPECT_EQ(j["active_edges"].size(), 1u);
  EXPECT_EQ(j["expected_reward"], -0.42);
  EXPECT_EQ(j["trajectory_length"], 10);
  EXPECT_TRUE(j["expert"].is_null());
  r.expert = 2;
  EXPECT_EQ(report_json(r, s)["expert"], 2);
  auto table = report_table(r, s);
  for (const char* name : {"sales", "customer", "dates", "s_cust", "replicated"}) EXPECT_NE(table.find(name), std::string::npos) << name;
}

}  // namespace
}  // namespace partadvisor
