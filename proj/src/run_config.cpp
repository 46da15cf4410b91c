#include "partadvisor/run_config.hpp"

#include <algorithm>
#include <fstream>

namespace partadvisor {

using nlohmann::json;

namespace {

void only_fields(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) throw InputError(where + "." + key + ": unknown field");
}

template <typename T>
void read(const json& obj, const char* field, T& out, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end()) return;
  const std::string path = where + "." + field;
  if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) throw InputError(path + ": expected a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) throw InputError(path + ": expected an integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!it->is_number()) throw InputError(path + ": expected a number");
  }
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw InputError(path + ": has the wrong type");
  }
}

void parse_deploy(const json& j, DeploymentConfig& d, const std::string& where) {
  only_fields(j, {"node_count", "network_bandwidth", "scan_throughput", "join_cpu_factor", "include_join_cpu", "skew"}, where);
  read(j, "node_count", d.node_count, where);
  read(j, "network_bandwidth", d.network_bandwidth, where);
  read(j, "scan_throughput", d.scan_throughput, where);
  read(j, "join_cpu_factor", d.join_cpu_factor, where);
  read(j, "include_join_cpu", d.include_join_cpu, where);
  if (auto it = j.find("skew"); it != j.end()) {
    if (!it->is_array()) throw InputError(where + ".skew: expected an array");
    d.skew.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string w = where + ".skew[" + std::to_string(i) + "]";
      const auto& e = (*it)[i];
      only_fields(e, {"table", "key", "multiplier"}, w);
      std::string table, key;
      double m = 1.0;
      read(e, "table", table, w);
      read(e, "key", key, w);
      read(e, "multiplier", m, w);
      if (table.empty() || key.empty()) throw InputError(w + ": table and key are required");
      d.skew[{table, key}] = m;
    }
  }
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(where + ": " + e.what());
  }
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

RunConfig parse_run_config(const json& doc) {
  RunConfig c;
  only_fields(doc, {"train", "deploy", "sim_profile", "committee"}, "config");

  if (auto it = doc.find("train"); it != doc.end()) {
    const std::string w = "config.train";
    const auto& t = *it;
    only_fields(t, {"episodes", "t_max", "seed", "mix_mode", "fixed_mix", "warm_start_offset", "timeout_reward_factor",
                    "hidden_layers", "learning_rate", "gamma", "tau", "batch_size", "buffer_capacity", "epsilon_start",
                    "epsilon_decay", "online"},
                w);
    read(t, "episodes", c.train.episodes, w);
    read(t, "t_max", c.train.t_max, w);
    read(t, "seed", c.train.seed, w);
    if (auto m = t.find("mix_mode"); m != t.end()) {
      if (*m == "uniform")
        c.train.mix_mode = TrainConfig::MixMode::kUniformSampled;
      else if (*m == "fixed")
        c.train.mix_mode = TrainConfig::MixMode::kFixed;
      else
        throw InputError(w + ".mix_mode: expected \"uniform\" or \"fixed\"");
    }
    read(t, "fixed_mix", c.train.fixed_mix, w);
    read(t, "warm_start_offset", c.train.warm_start_offset, w);
    read(t, "timeout_reward_factor", c.train.timeout_reward_factor, w);
    auto& a = c.train.agent;
    read(t, "hidden_layers", a.hidden_layers, w);
    read(t, "learning_rate", a.learning_rate, w);
    read(t, "gamma", a.gamma, w);
    read(t, "tau", a.tau, w);
    read(t, "batch_size", a.batch_size, w);
    read(t, "buffer_capacity", a.buffer_capacity, w);
    read(t, "epsilon_start", a.epsilon_start, w);
    read(t, "epsilon_decay", a.epsilon_decay, w);
    if (auto o = t.find("online"); o != t.end()) {
      only_fields(*o, {"use_cache", "lazy_repartitioning", "timeouts"}, w + ".online");
      read(*o, "use_cache", c.train.online.use_cache, w + ".online");
      read(*o, "lazy_repartitioning", c.train.online.lazy_repartitioning, w + ".online");
      read(*o, "timeouts", c.train.online.timeouts, w + ".online");
    }
    if (c.train.episodes < 0) throw InputError(w + ".episodes: must be >= 0");
    if (c.train.t_max < 1) throw InputError(w + ".t_max: must be >= 1");
    if (c.train.warm_start_offset < 0) throw InputError(w + ".warm_start_offset: must be >= 0");
    if (!(c.train.timeout_reward_factor >= 1.0)) throw InputError(w + ".timeout_reward_factor: must be >= 1");
    if (a.hidden_layers.empty() || std::any_of(a.hidden_layers.begin(), a.hidden_layers.end(), [](int n) { return n < 1; }))
      throw InputError(w + ".hidden_layers: expected positive layer widths");
    if (!(a.learning_rate > 0.0)) throw InputError(w + ".learning_rate: must be positive");
    if (!(a.gamma >= 0.0 && a.gamma <= 1.0)) throw InputError(w + ".gamma: must lie in [0,1]");
    if (!(a.tau >= 0.0 && a.tau <= 1.0)) throw InputError(w + ".tau: must lie in [0,1]");
    if (a.batch_size < 1) throw InputError(w + ".batch_size: must be >= 1");
    if (a.buffer_capacity < a.batch_size) throw InputError(w + ".buffer_capacity: must be >= batch_size");
    if (!(a.epsilon_start >= 0.0 && a.epsilon_start <= 1.0)) throw InputError(w + ".epsilon_start: must lie in [0,1]");
    if (!(a.epsilon_decay > 0.0 && a.epsilon_decay <= 1.0)) throw InputError(w + ".epsilon_decay: must lie in (0,1]");
  }

  if (auto it = doc.find("deploy"); it != doc.end()) parse_deploy(*it, c.deploy, "config.deploy");
  c.sim_profile.deploy = c.deploy;

  if (auto it = doc.find("sim_profile"); it != doc.end()) {
    const std::string w = "config.sim_profile";
    const auto& s = *it;
    only_fields(s, {"scan_exponent", "shuffle_latency", "replication_scan_penalty", "noise_fraction", "sampling_rate",
                    "min_sample_rows", "deploy"},
                w);
    read(s, "scan_exponent", c.sim_profile.scan_exponent, w);
    read(s, "shuffle_latency", c.sim_profile.shuffle_latency, w);
    read(s, "replication_scan_penalty", c.sim_profile.replication_scan_penalty, w);
    read(s, "noise_fraction", c.sim_profile.noise_fraction, w);
    if (auto r = s.find("sampling_rate"); r != s.end()) {
      if (r->is_number())
        c.sampling.rates = {r->get<double>()};
      else
        read(s, "sampling_rate", c.sampling.rates, w);
      if (c.sampling.rates.empty()) throw InputError(w + ".sampling_rate: expected a rate or one rate per table");
      for (double rate : c.sampling.rates)
        if (!(rate > 0.0 && rate <= 1.0)) throw InputError(w + ".sampling_rate: rates must lie in (0,1]");
    }
    read(s, "min_sample_rows", c.sampling.min_rows, w);
    if (c.sampling.min_rows < 0) throw InputError(w + ".min_sample_rows: must be >= 0");
    if (auto d = s.find("deploy"); d != s.end()) parse_deploy(*d, c.sim_profile.deploy, w + ".deploy");
    try {
      c.sim_profile.validate();
    } catch (const std::invalid_argument& e) {
      throw InputError(w + ": " + e.what());
    }
  }

  if (auto it = doc.find("committee"); it != doc.end()) {
    const std::string w = "config.committee";
    only_fields(*it, {"f_low", "f_high", "expert_episodes", "max_routing_draws", "extension_episodes",
                       "expert_refresh_episodes"},
                w);
    read(*it, "f_low", c.committee.f_low, w);
    read(*it, "f_high", c.committee.f_high, w);
    read(*it, "expert_episodes", c.committee.expert_episodes, w);
    read(*it, "max_routing_draws", c.committee.max_routing_draws, w);
    read(*it, "extension_episodes", c.committee.extension_episodes, w);
    read(*it, "expert_refresh_episodes", c.committee.expert_refresh_episodes, w);
    if (!(c.committee.f_high > 0.0 && c.committee.f_low >= 0.0 && c.committee.f_low <= c.committee.f_high))
      throw InputError(w + ": need 0 <= f_low <= f_high and f_high > 0");
    if (c.committee.expert_episodes < 0 || c.committee.extension_episodes < 0 || c.committee.max_routing_draws < 0 ||
        c.committee.expert_refresh_episodes < 0)
      throw InputError(w + ": episode and draw counts must be >= 0");
  }
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_json_file(path)); }

json run_config_to_json(const RunConfig& c) {
  auto deploy_json = [](const DeploymentConfig& d) {
    json skew = json::array();
    for (const auto& [key, m] : d.skew) skew.push_back({{"table", key.first}, {"key", key.second}, {"multiplier", m}});
    return json{{"node_count", d.node_count},
                {"network_bandwidth", d.network_bandwidth},
                {"scan_throughput", d.scan_throughput},
                {"join_cpu_factor", d.join_cpu_factor},
                {"include_join_cpu", d.include_join_cpu},
                {"skew", skew}};
  };
  const auto& t = c.train;
  json doc;
  doc["train"] = {{"episodes", t.episodes},
                  {"t_max", t.t_max},
                  {"seed", t.seed},
                  {"mix_mode", t.mix_mode == TrainConfig::MixMode::kFixed ? "fixed" : "uniform"},
                  {"fixed_mix", t.fixed_mix},
                  {"warm_start_offset", t.warm_start_offset},
                  {"timeout_reward_factor", t.timeout_reward_factor},
                  {"hidden_layers", t.agent.hidden_layers},
                  {"learning_rate", t.agent.learning_rate},
                  {"gamma", t.agent.gamma},
                  {"tau", t.agent.tau},
                  {"batch_size", t.agent.batch_size},
                  {"buffer_capacity", t.agent.buffer_capacity},
                  {"epsilon_start", t.agent.epsilon_start},
                  {"epsilon_decay", t.agent.epsilon_decay},
                  {"online",
                   {{"use_cache", t.online.use_cache},
                    {"lazy_repartitioning", t.online.lazy_repartitioning},
                    {"timeouts", t.online.timeouts}}}};
  doc["deploy"] = deploy_json(c.deploy);
  doc["sim_profile"] = {{"scan_exponent", c.sim_profile.scan_exponent},
                        {"shuffle_latency", c.sim_profile.shuffle_latency},
                        {"replication_scan_penalty", c.sim_profile.replication_scan_penalty},
                        {"noise_fraction", c.sim_profile.noise_fraction},
                        {"sampling_rate", c.sampling.rates},
                        {"min_sample_rows", c.sampling.min_rows},
                        {"deploy", deploy_json(c.sim_profile.deploy)}};
  doc["committee"] = {{"f_low", c.committee.f_low},
                      {"f_high", c.committee.f_high},
                      {"expert_episodes", c.committee.expert_episodes},
                      {"max_routing_draws", c.committee.max_routing_draws},
                      {"extension_episodes", c.committee.extension_episodes},
                      {"expert_refresh_episodes", c.committee.expert_refresh_episodes}};
  return doc;
}

void check_against_schema(const RunConfig& c, const Schema& schema) {
  auto check_skew = [&](const DeploymentConfig& d, const std::string& where) {
    for (const auto& [key, m] : d.skew) {
      const int t = schema.find_table(key.first);
      if (t < 0) throw InputError(where + ".skew: unknown table '" + key.first + "'");
      bool found = false;
      for (int k = 0; k < schema.table(t).key_count(); ++k) found = found || schema.table(t).key_name(k) == key.second;
      if (!found) throw InputError(where + ".skew: table '" + key.first + "' has no key '" + key.second + "'");
    }
  };
  check_skew(c.deploy, "config.deploy");
  check_skew(c.sim_profile.deploy, "config.sim_profile.deploy");
  for (const auto& [name, e] : c.sim_profile.scan_exponent)
    if (schema.find_table(name) < 0) throw InputError("config.sim_profile.scan_exponent: unknown table '" + name + "'");
  if (c.sampling.rates.size() != 1 && c.sampling.rates.size() != static_cast<std::size_t>(schema.table_count()))
    throw InputError("config.sim_profile.sampling_rate: give one rate or one per table");
  if (!c.train.fixed_mix.empty() && c.train.fixed_mix.size() != static_cast<std::size_t>(schema.query_count()))
    throw InputError("config.train.fixed_mix: expected " + std::to_string(schema.query_count()) + " frequencies");
  if (c.train.t_max < schema.table_count())
    throw InputError("config.train.t_max: must be at least the table count (" + std::to_string(schema.table_count()) + ")");
}

}  // namespace partadvisor
