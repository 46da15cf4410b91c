#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "partadvisor/cluster_sim.hpp"
#include "partadvisor/dqn_agent.hpp"
#include "partadvisor/mdp.hpp"
#include "partadvisor/runtime_cache.hpp"

namespace partadvisor {

/// Switches for the online-phase optimizations. Sampling is configured separately.
struct OnlineOptions {
  bool use_cache = true;
  bool lazy_repartitioning = true;
  bool timeouts = true;
};

struct TrainConfig {
  AgentConfig agent;
  int episodes = 600;
  int t_max = 100;
  std::uint64_t seed = 1;
  enum class MixMode { kUniformSampled, kFixed };
  /// kUniformSampled draws every raw frequency from U[0,1] per episode; kFixed reuses
  /// `fixed_mix` (all ones when empty).
  MixMode mix_mode = MixMode::kUniformSampled;
  std::vector<double> fixed_mix;
  /// A warm-started run begins with the epsilon an offline run reaches after this many episodes.
  int warm_start_offset = 600;
  OnlineOptions online;
  /// Reward of a timed-out step is best_reward * timeout_reward_factor.
  double timeout_reward_factor = 1.05;
};

struct SamplingConfig {
  /// Per-table rate; a single entry applies to every table.
  std::vector<double> rates{1.0};
  std::int64_t min_rows = 100;

  /// One rate per table; throws std::invalid_argument on a length mismatch.
  std::vector<double> rates_for(int table_count) const;
  SampledDatabase sample(const Schema& schema) const { return SampledDatabase::sample(schema, rates_for(schema.table_count()), min_rows); }
};

/// -C * r* / (s_i * f_i): a query running longer than this cannot belong to a partitioning
/// that beats the best known reward r*. None when f_i = 0.
std::optional<double> timeout_for(double denominator, double best_reward, double scale_factor, double frequency);

WorkloadMix sample_uniform_mix(int query_count, Rng& rng);

struct StepRecord {
  int episode = 0;
  int step = 0;
  int action = 0;
  double reward = 0.0;
  std::int64_t cache_hits = 0;
  std::int64_t executed_queries = 0;
  std::int64_t repartitions = 0;
  double epsilon = 0.0;
  double loss = 0.0;
  bool timed_out = false;
};

nlohmann::json to_json(const StepRecord& r);
void write_log(std::ostream& out, const std::vector<StepRecord>& log);

struct TrainingResult {
  DqnAgent agent;
  std::vector<StepRecord> log;
  std::vector<WorkloadMix> episode_mixes;
};

using MixSampler = std::function<WorkloadMix(Rng&)>;

/// Per-step record of the work an online step caused; emitted as the simulator trace.
struct StepWork {
  std::vector<int> executed_queries;
  std::vector<double> runtimes;
  std::vector<int> repartitioned_tables;
  std::int64_t cache_hits = 0;
  bool timed_out = false;
};

/// Online reward source: cache lookups, lazy repartitioning, measured sample runtimes,
/// scale factors and timeouts.
class OnlineBackend : public CostBackend {
 public:
  OnlineBackend(const Schema& schema, ClusterSimulator& cluster, RuntimeCache& cache, std::vector<double> scale_factors,
                OnlineOptions options);

  std::vector<double> query_costs(const PartitioningState& p) override;
  std::optional<std::vector<double>> query_costs_within(const PartitioningState& p, const Budget& budget) override;

  /// Work done since the previous call.
  StepWork take_work();
  std::int64_t cache_hits() const { return cache_hits_; }

 private:
  std::optional<std::vector<double>> evaluate(const PartitioningState& p, const Budget* budget);

  const Schema* schema_;
  ClusterSimulator* cluster_;
  RuntimeCache* cache_;
  std::vector<double> scale_;
  OnlineOptions options_;
  StepWork work_;
  std::int64_t cache_hits_ = 0;
};

/// Read-only scoring for inference on online-trained agents: cached sample runtimes with
/// simulation as the fallback, scale factors applied.
class CacheScorer : public CostBackend {
 public:
  CacheScorer(const Schema& schema, const RuntimeCache& cache, const SampledDatabase& db, SimProfile profile,
              std::uint64_t seed, std::vector<double> scale_factors);
  std::vector<double> query_costs(const PartitioningState& p) override;
  std::int64_t fallbacks() const { return fallbacks_; }

 private:
  const Schema* schema_;
  const RuntimeCache* cache_;
  const SampledDatabase* db_;
  SimProfile profile_;
  std::uint64_t seed_;
  std::vector<double> scale_;
  std::int64_t fallbacks_ = 0;
};

/// Stateless simulated runtimes of every query on `db`; used to score designs on the full
/// dataset without deploying them.
class SimulationBackend : public CostBackend {
 public:
  SimulationBackend(SampledDatabase db, SimProfile profile, std::uint64_t seed)
      : db_(std::move(db)), profile_(std::move(profile)), seed_(seed) {}
  std::vector<double> query_costs(const PartitioningState& p) override;

 private:
  SampledDatabase db_;
  SimProfile profile_;
  std::uint64_t seed_;
};

/// Everything the online phase shares across runs: the sampled cluster with its deployed
/// designs, the full dataset, the scale factors (computed once) and the runtime cache.
class OnlineSession {
 public:
  OnlineSession(const Schema& schema, SimProfile profile, const SamplingConfig& sampling, std::uint64_t seed,
                const PartitioningState& p_offline);

  const Schema& schema() const { return schema_; }
  ClusterSimulator& cluster() { return cluster_; }
  const ClusterSimulator& cluster() const { return cluster_; }
  const SampledDatabase& full_database() const { return full_; }
  RuntimeCache& cache() { return cache_; }
  const RuntimeCache& cache() const { return cache_; }
  const std::vector<double>& scale_factors() const { return scale_; }
  /// Number of queries whose scale factor has been measured; each query is measured once.
  int scale_factor_measurements() const { return scale_measurements_; }
  const PartitioningState& offline_partitioning() const { return p_offline_; }

  /// Adopts a schema with more queries (same tables and edges). Scale factors are measured
  /// only for the new queries; cache and deployed designs carry over.
  void extend(const Schema& extended);

  OnlineBackend backend(OnlineOptions options) { return OnlineBackend(schema_, cluster_, cache_, scale_, options); }
  CacheScorer scorer() const;

  void set_trace(std::ostream* trace) { trace_ = trace; }
  std::ostream* trace() const { return trace_; }

 private:
  Schema schema_;
  SamplingConfig sampling_;
  SampledDatabase full_;
  ClusterSimulator cluster_;
  RuntimeCache cache_;
  std::vector<double> scale_;
  int scale_measurements_ = 0;
  PartitioningState p_offline_;
  std::ostream* trace_ = nullptr;
};

/// Generic episode loop shared by both phases: reset to P_0 with a fresh mix, t_max
/// epsilon-greedy steps that store transitions and train on a minibatch, then decay
/// epsilon and soft-update the target network.
TrainingResult run_episodes(DqnAgent agent, const Schema& schema, CostBackend& backend, const TrainConfig& config,
                            const MixSampler& sampler, OnlineBackend* online = nullptr, std::ostream* trace = nullptr);

MixSampler mix_sampler_for(const TrainConfig& config, int query_count);

/// Cost-model training from a randomly initialized agent.
TrainingResult train_offline(const Schema& schema, const DeploymentConfig& deploy, const TrainConfig& config);

/// Training against the simulated cluster. A warm start keeps the given weights and lowers
/// the initial epsilon; without one a fresh agent is trained from scratch.
TrainingResult train_online(OnlineSession& session, const TrainConfig& config,
                            const std::optional<DqnAgent>& warm_start = std::nullopt,
                            const MixSampler& sampler = nullptr);

}  // namespace partadvisor
