#include "partadvisor/training.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace partadvisor {

std::optional<double> timeout_for(double denominator, double best_reward, double scale_factor, double frequency) {
  if (frequency == 0.0) return std::nullopt;
  if (!(best_reward < 0.0)) throw std::invalid_argument("timeout_for: best reward must be negative");
  if (!(scale_factor > 0.0) || !(frequency > 0.0)) throw std::invalid_argument("timeout_for: scale factor and frequency must be positive");
  return -denominator * best_reward / (scale_factor * frequency);
}

WorkloadMix sample_uniform_mix(int query_count, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> raw(static_cast<std::size_t>(query_count));
  for (auto& f : raw) f = u(rng);
  return WorkloadMix::from_raw(std::move(raw));
}

nlohmann::json to_json(const StepRecord& r) {
  return {{"episode", r.episode},
          {"step", r.step},
          {"action", r.action},
          {"reward", r.reward},
          {"cache_hits", r.cache_hits},
          {"executed_queries", r.executed_queries},
          {"repartitions", r.repartitions},
          {"epsilon", r.epsilon},
          {"loss", r.loss},
          {"timed_out", r.timed_out}};
}

void write_log(std::ostream& out, const std::vector<StepRecord>& log) {
  for (const auto& r : log) out << to_json(r).dump() << '\n';
}

OnlineBackend::OnlineBackend(const Schema& schema, ClusterSimulator& cluster, RuntimeCache& cache,
                             std::vector<double> scale_factors, OnlineOptions options)
    : schema_(&schema), cluster_(&cluster), cache_(&cache), scale_(std::move(scale_factors)), options_(options) {
  if (scale_.size() != static_cast<std::size_t>(schema.query_count()))
    throw std::invalid_argument("one scale factor per query required");
}

std::vector<double> OnlineBackend::query_costs(const PartitioningState& p) { return *evaluate(p, nullptr); }

std::optional<std::vector<double>> OnlineBackend::query_costs_within(const PartitioningState& p, const Budget& budget) {
  return evaluate(p, options_.timeouts ? &budget : nullptr);
}

std::optional<std::vector<double>> OnlineBackend::evaluate(const PartitioningState& p, const Budget* budget) {
  const int m = schema_->query_count();
  std::vector<double> runtime(static_cast<std::size_t>(m), 0.0);
  std::vector<int> missing;
  for (int j = 0; j < m; ++j) {
    std::optional<double> hit;
    if (options_.use_cache) hit = cache_->lookup(schema_->query(j), p);
    if (hit) {
      runtime[static_cast<std::size_t>(j)] = *hit;
      ++cache_hits_;
      ++work_.cache_hits;
    } else {
      missing.push_back(j);
    }
  }

  // Lazy repartitioning touches only tables some uncached query needs.
  std::set<int> tables;
  if (options_.lazy_repartitioning) {
    for (int j : missing)
      for (const auto& st : schema_->query(j).tables) tables.insert(st.table);
  } else {
    for (int t = 0; t < schema_->table_count(); ++t) tables.insert(t);
  }
  for (int t : tables) {
    const auto want = p.designs[static_cast<std::size_t>(t)];
    if (cluster_->deployed()[static_cast<std::size_t>(t)] != want) {
      cluster_->repartition_table(t, want);
      work_.repartitioned_tables.push_back(t);
    }
  }

  for (int j : missing) {
    const double t = cluster_->run_query(p, j);
    work_.executed_queries.push_back(j);
    work_.runtimes.push_back(t);
    if (budget) {
      const auto limit = timeout_for(budget->denominator, budget->best_reward, scale_[static_cast<std::size_t>(j)],
                                     (*budget->mix)[static_cast<std::size_t>(j)]);
      if (limit && t > *limit) {
        // Aborted at the limit; the partial runtime is not a measurement.
        work_.runtimes.back() = *limit;
        work_.timed_out = true;
        return std::nullopt;
      }
    }
    if (options_.use_cache) cache_->insert(schema_->query(j), p, t);
    runtime[static_cast<std::size_t>(j)] = t;
  }

  for (int j = 0; j < m; ++j) runtime[static_cast<std::size_t>(j)] *= scale_[static_cast<std::size_t>(j)];
  return runtime;
}

StepWork OnlineBackend::take_work() {
  StepWork w = std::move(work_);
  work_ = StepWork{};
  return w;
}

CacheScorer::CacheScorer(const Schema& schema, const RuntimeCache& cache, const SampledDatabase& db, SimProfile profile,
                         std::uint64_t seed, std::vector<double> scale_factors)
    : schema_(&schema), cache_(&cache), db_(&db), profile_(std::move(profile)), seed_(seed), scale_(std::move(scale_factors)) {}

std::vector<double> CacheScorer::query_costs(const PartitioningState& p) {
  std::vector<double> c;
  c.reserve(static_cast<std::size_t>(schema_->query_count()));
  for (int j = 0; j < schema_->query_count(); ++j) {
    auto hit = cache_->peek(schema_->query(j), p);
    double t;
    if (hit) {
      t = *hit;
    } else {
      ++fallbacks_;
      t = simulate_query(p, db_->schema().query(j), *db_, profile_, seed_);
    }
    c.push_back(t * scale_[static_cast<std::size_t>(j)]);
  }
  return c;
}

std::vector<double> SimulationBackend::query_costs(const PartitioningState& p) {
  std::vector<double> c;
  for (const auto& q : db_.schema().queries()) c.push_back(simulate_query(p, q, db_, profile_, seed_));
  return c;
}

std::vector<double> SamplingConfig::rates_for(int table_count) const {
  if (rates.size() == 1) return std::vector<double>(static_cast<std::size_t>(table_count), rates[0]);
  if (rates.size() != static_cast<std::size_t>(table_count)) throw std::invalid_argument("sampling rates: give one rate or one per table");
  return rates;
}

OnlineSession::OnlineSession(const Schema& schema, SimProfile profile, const SamplingConfig& sampling, std::uint64_t seed,
                             const PartitioningState& p_offline)
    : schema_(schema),
      sampling_(sampling),
      full_(SampledDatabase::full(schema)),
      cluster_(sampling.sample(schema), profile, seed),
      p_offline_(p_offline) {
  if (!is_valid(p_offline_, schema_)) throw std::invalid_argument("offline partitioning is not a valid state");
  scale_ = compute_scale_factors(p_offline_, full_, cluster_.database(), cluster_.profile(), seed);
  scale_measurements_ = schema.query_count();
}

void OnlineSession::extend(const Schema& extended) {
  const int old_m = schema_.query_count();
  if (extended.query_count() < old_m || extended.with_query_prefix(old_m).fingerprint() != schema_.fingerprint())
    throw std::invalid_argument("extended schema must keep the tables, edges and existing queries");
  schema_ = extended;
  full_ = SampledDatabase::full(extended);
  cluster_.replace_database(sampling_.sample(extended));
  for (int j = old_m; j < extended.query_count(); ++j) {
    const double c_full = simulate_query(p_offline_, full_.schema().query(j), full_, cluster_.profile(), cluster_.seed());
    const double c_sample =
        simulate_query(p_offline_, cluster_.database().schema().query(j), cluster_.database(), cluster_.profile(), cluster_.seed());
    if (!(c_sample > 0.0)) throw std::domain_error("query " + std::to_string(j) + " has zero runtime on the sample");
    scale_.push_back(c_full / c_sample);
    ++scale_measurements_;
  }
}

CacheScorer OnlineSession::scorer() const {
  return CacheScorer(schema_, cache_, cluster_.database(), cluster_.profile(), cluster_.seed(), scale_);
}

MixSampler mix_sampler_for(const TrainConfig& config, int query_count) {
  if (config.mix_mode == TrainConfig::MixMode::kFixed) {
    auto mix = config.fixed_mix.empty() ? WorkloadMix::uniform(query_count) : WorkloadMix::from_raw(config.fixed_mix);
    if (mix.size() != static_cast<std::size_t>(query_count)) throw std::invalid_argument("fixed mix length does not match the query count");
    return [mix](Rng&) { return mix; };
  }
  return [query_count](Rng& rng) { return sample_uniform_mix(query_count, rng); };
}

TrainingResult run_episodes(DqnAgent agent, const Schema& schema, CostBackend& backend, const TrainConfig& config,
                            const MixSampler& sampler, OnlineBackend* online, std::ostream* trace) {
  if (config.t_max < schema.table_count())
    throw std::invalid_argument("t_max must be at least the table count so every state is reachable");
  Environment env(schema, backend);
  env.enable_timeouts(online != nullptr && config.online.timeouts, config.timeout_reward_factor);
  if (agent.input_size() != encoded_size(schema) || agent.action_count() != env.actions().size())
    throw std::invalid_argument("agent dimensions do not match the schema");

  Rng mix_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  TrainingResult result;
  result.log.reserve(static_cast<std::size_t>(config.episodes) * static_cast<std::size_t>(config.t_max));
  const std::int64_t first_episode = agent.epsilon().episode();

  for (int e = 0; e < config.episodes; ++e) {
    const auto mix = sampler(mix_rng);
    result.episode_mixes.push_back(mix);
    const double epsilon = agent.epsilon().value();
    env.reset(mix);
    for (int t = 0; t < config.t_max; ++t) {
      const auto obs = env.observation();
      const int action = agent.act(obs, env.mask());
      auto step = env.step(action);
      StepRecord rec;
      rec.episode = static_cast<int>(agent.epsilon().episode() - first_episode);
      rec.step = t;
      rec.action = action;
      rec.reward = step.transition.reward;
      rec.epsilon = epsilon;
      rec.timed_out = step.timed_out;
      agent.remember(std::move(step.transition));
      rec.loss = agent.learn();
      if (online) {
        // Work from the episode reset is attributed to its first step.
        auto work = online->take_work();
        rec.cache_hits = work.cache_hits;
        rec.executed_queries = static_cast<std::int64_t>(work.executed_queries.size());
        rec.repartitions = static_cast<std::int64_t>(work.repartitioned_tables.size());
        if (trace) {
          nlohmann::json line{{"episode", rec.episode}, {"step", t}, {"action", action},
                              {"executed_queries", work.executed_queries}, {"runtimes", work.runtimes},
                              {"timed_out", work.timed_out}};
          line["repartitioned_tables"] = nlohmann::json::array();
          for (int tbl : work.repartitioned_tables) line["repartitioned_tables"].push_back(schema.table(tbl).name);
          *trace << line.dump() << '\n';
        }
      }
      result.log.push_back(rec);
    }
    agent.end_episode();
  }
  result.agent = std::move(agent);
  return result;
}

TrainingResult train_offline(const Schema& schema, const DeploymentConfig& deploy, const TrainConfig& config) {
  deploy.validate();
  CostModelBackend backend(schema, deploy);
  DqnAgent agent(encoded_size(schema), ActionSpace(schema).size(), config.agent, config.seed, schema.fingerprint());
  return run_episodes(std::move(agent), schema, backend, config, mix_sampler_for(config, schema.query_count()));
}

TrainingResult train_online(OnlineSession& session, const TrainConfig& config, const std::optional<DqnAgent>& warm_start,
                            const MixSampler& sampler) {
  const auto& schema = session.schema();
  DqnAgent agent;
  if (warm_start) {
    agent = *warm_start;
    if (agent.schema_fingerprint() != schema.fingerprint()) throw std::invalid_argument("warm-start agent was trained for a different schema");
    agent.epsilon() = EpsilonSchedule(config.agent.epsilon_start, config.agent.epsilon_decay).skipped(config.warm_start_offset);
    // Cost-model transitions carry rewards from a different backend.
    agent.replay().clear();
  } else {
    agent = DqnAgent(encoded_size(schema), ActionSpace(schema).size(), config.agent, config.seed, schema.fingerprint());
  }
  auto backend = session.backend(config.online);
  return run_episodes(std::move(agent), schema, backend, config,
                      sampler ? sampler : mix_sampler_for(config, schema.query_count()), &backend, session.trace());
}

}  // namespace partadvisor
