#include "partadvisor/committee.hpp"

#include <stdexcept>

namespace partadvisor {

WorkloadMix probe_mix(int query_count, int query, double f_low, double f_high) {
  if (query < 0 || query >= query_count) throw std::invalid_argument("probe query out of range");
  if (!(f_high > 0.0) || !(f_low >= 0.0) || f_low > f_high) throw std::invalid_argument("probe frequencies need 0 <= f_low <= f_high, f_high > 0");
  std::vector<double> raw(static_cast<std::size_t>(query_count), f_low);
  raw[static_cast<std::size_t>(query)] = f_high;
  return WorkloadMix::from_raw(std::move(raw));
}

int ReferenceSet::find(const PartitioningState& p) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].same_designs(p)) return static_cast<int>(i);
  return -1;
}

ReferenceSet derive_references(const DqnAgent& naive, const Schema& schema, CostBackend& scorer,
                               const CommitteeConfig& config, int t_max) {
  ReferenceSet refs;
  for (int q = 0; q < schema.query_count(); ++q) {
    const auto mix = probe_mix(schema.query_count(), q, config.f_low, config.f_high);
    auto rec = recommend(naive, mix, schema, scorer, t_max);
    if (refs.find(rec.state) >= 0) continue;
    refs.costs.push_back(scorer.query_costs(rec.state));
    refs.states.push_back(std::move(rec.state));
    refs.probe_queries.push_back(q);
  }
  return refs;
}

int assign_subspace(const WorkloadMix& mix, const ReferenceSet& refs) {
  if (refs.size() == 0) throw std::invalid_argument("no reference partitionings");
  int best = -1;
  double best_cost = 0.0;
  for (std::size_t k = 0; k < refs.size(); ++k) {
    if (refs.costs[k].size() != mix.size())
      throw std::invalid_argument("reference " + std::to_string(k) + " has no cost for every query of the mix");
    const double c = weighted_cost(refs.costs[k], mix);
    if (best < 0 || c < best_cost) {
      best = static_cast<int>(k);
      best_cost = c;
    }
  }
  return best;
}

MixSampler routed_sampler(const ReferenceSet& refs, int k, int query_count, const CommitteeConfig& config) {
  return [refs, k, query_count, config](Rng& rng) {
    for (int i = 0; i < config.max_routing_draws; ++i) {
      auto mix = sample_uniform_mix(query_count, rng);
      if (assign_subspace(mix, refs) == k) return mix;
    }
    // Subspace too small to hit by chance (or empty under ties).
    return probe_mix(query_count, refs.probe_queries[static_cast<std::size_t>(k)], config.f_low, config.f_high);
  };
}

namespace {

// Fine-tunes `start` on the routed subspace of reference k with the reduced epsilon.
TrainingResult train_expert(const DqnAgent& start, const ReferenceSet& refs, std::size_t k, int episodes,
                            const Schema& schema, CostBackend& backend, OnlineBackend* online, const TrainConfig& config,
                            const CommitteeConfig& committee, std::ostream* trace) {
  TrainConfig cfg = config;
  cfg.episodes = episodes;
  cfg.seed = config.seed + 7919 * (k + 1);
  DqnAgent expert = start;
  expert.epsilon() = EpsilonSchedule(cfg.agent.epsilon_start, cfg.agent.epsilon_decay).skipped(cfg.warm_start_offset);
  expert.replay().clear();
  expert.rng().seed(cfg.seed);
  return run_episodes(std::move(expert), schema, backend, cfg,
                      routed_sampler(refs, static_cast<int>(k), schema.query_count(), committee), online, trace);
}

}  // namespace

std::vector<TrainingResult> train_experts(const DqnAgent& naive, const ReferenceSet& refs, std::size_t first,
                                          const Schema& schema, CostBackend& backend, OnlineBackend* online,
                                          const TrainConfig& config, const CommitteeConfig& committee,
                                          std::ostream* trace) {
  std::vector<TrainingResult> out;
  for (std::size_t k = first; k < refs.size(); ++k)
    out.push_back(train_expert(naive, refs, k, committee.expert_episodes, schema, backend, online, config, committee, trace));
  return out;
}

Committee build_committee(DqnAgent naive, const Schema& schema, CostBackend& backend, OnlineBackend* online,
                          CostBackend& scorer, const TrainConfig& config, const CommitteeConfig& committee,
                          std::ostream* trace) {
  Committee c;
  c.references = derive_references(naive, schema, scorer, committee, config.t_max);
  for (auto& r : train_experts(naive, c.references, 0, schema, backend, online, config, committee, trace))
    c.experts.push_back(std::move(r.agent));
  c.naive = std::move(naive);
  return c;
}

ExtensionResult extend_with_queries(Committee& committee, const Schema& extended, CostBackend& backend,
                                    OnlineBackend* online, CostBackend& scorer, const TrainConfig& config,
                                    const CommitteeConfig& committee_config, std::ostream* trace) {
  if (committee.references.size() == 0 || committee.experts.size() != committee.references.size())
    throw std::invalid_argument("committee is incomplete");
  const int old_m = static_cast<int>(committee.references.costs[0].size());
  const int extra = extended.query_count() - old_m;
  if (extra < 0 || encoded_size(extended) != committee.naive.input_size() + extra ||
      ActionSpace(extended).size() != committee.naive.action_count())
    throw std::invalid_argument("extended schema must add queries only");

  const auto fingerprint = extended.fingerprint();
  auto widen = [&](DqnAgent& a) {
    a.widen_input(extra);
    a.set_schema_fingerprint(fingerprint);
  };
  widen(committee.naive);
  for (auto& e : committee.experts) widen(e);

  ExtensionResult result;
  TrainConfig cfg = config;
  cfg.episodes = committee_config.extension_episodes;
  cfg.mix_mode = TrainConfig::MixMode::kUniformSampled;
  DqnAgent naive = std::move(committee.naive);
  naive.epsilon() = EpsilonSchedule(cfg.agent.epsilon_start, cfg.agent.epsilon_decay).skipped(cfg.warm_start_offset);
  result.naive_retraining =
      run_episodes(std::move(naive), extended, backend, cfg, mix_sampler_for(cfg, extended.query_count()), online, trace);
  committee.naive = result.naive_retraining.agent;

  auto& refs = committee.references;
  for (std::size_t k = 0; k < refs.size(); ++k) refs.costs[k] = scorer.query_costs(refs.states[k]);
  const std::size_t first_new = refs.size();
  auto fresh = derive_references(committee.naive, extended, scorer, committee_config, config.t_max);
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    if (refs.find(fresh.states[i]) >= 0) continue;
    result.new_references.push_back(static_cast<int>(refs.size()));
    refs.states.push_back(fresh.states[i]);
    refs.costs.push_back(fresh.costs[i]);
    refs.probe_queries.push_back(fresh.probe_queries[i]);
  }
  // Old experts never saw the new frequency inputs and their subspaces moved.
  if (committee_config.expert_refresh_episodes > 0) {
    for (std::size_t k = 0; k < first_new; ++k) {
      result.refreshed_experts.push_back(train_expert(committee.experts[k], refs, k, committee_config.expert_refresh_episodes,
                                                      extended, backend, online, config, committee_config, trace));
      committee.experts[k] = result.refreshed_experts.back().agent;
    }
  }
  result.new_experts =
      train_experts(committee.naive, refs, first_new, extended, backend, online, config, committee_config, trace);
  for (const auto& r : result.new_experts) committee.experts.push_back(r.agent);
  return result;
}

Recommendation recommend_committee(const Committee& committee, const WorkloadMix& mix, const Schema& schema,
                                   CostBackend& scorer, int t_max) {
  const int k = assign_subspace(mix, committee.references);
  if (static_cast<std::size_t>(k) >= committee.experts.size())
    throw std::logic_error("no expert for reference " + std::to_string(k));
  auto rec = recommend(committee.experts[static_cast<std::size_t>(k)], mix, schema, scorer, t_max);
  rec.expert = k;
  Environment env(schema, scorer);
  env.reset(mix);
  const auto& ref = committee.references.states[static_cast<std::size_t>(k)];
  const double ref_reward = env.evaluate(ref);
  if (ref_reward > rec.reward) {
    rec.state = ref;
    rec.reward = ref_reward;
    rec.reference_fallback = true;
  }
  return rec;
}

}  // namespace partadvisor
