#include "partadvisor/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "partadvisor/baselines.hpp"

namespace partadvisor {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kBundleVersion = 1;

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

json state_to_json(const PartitioningState& p) {
  std::vector<int> slots;
  for (const auto& d : p.designs) slots.push_back(d.slot());
  std::vector<bool> edges(p.active_edges.begin(), p.active_edges.end());
  return {{"designs", slots}, {"active_edges", edges}};
}

PartitioningState state_from_json(const json& j, const Schema& schema, const std::string& where) {
  PartitioningState p;
  try {
    for (int slot : j.at("designs").get<std::vector<int>>()) {
      if (slot < 0) throw InputError(where + ".designs: negative slot");
      p.designs.push_back(TableDesign::from_slot(slot));
    }
    for (bool b : j.at("active_edges").get<std::vector<bool>>()) p.active_edges.push_back(b);
  } catch (const json::exception& e) {
    throw InputError(where + ": " + e.what());
  }
  auto violations = validate_state(p, schema);
  if (!violations.empty()) throw InputError(where + ": " + violations.front().message);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void write_log_file(const fs::path& path, const std::vector<StepRecord>& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write_log(out, log);
}

void append_logs(const fs::path& path, const std::vector<TrainingResult>& runs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  for (const auto& r : runs) write_log(out, r.log);
}

RunConfig config_for(const std::string& config_path, const Schema& schema, std::optional<std::uint64_t> seed) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  if (seed) cfg.train.seed = *seed;
  check_against_schema(cfg, schema);
  return cfg;
}

WorkloadMix training_mix(const RunConfig& cfg, int query_count) {
  if (cfg.train.mix_mode == TrainConfig::MixMode::kFixed && !cfg.train.fixed_mix.empty())
    return WorkloadMix::from_raw(cfg.train.fixed_mix);
  return WorkloadMix::uniform(query_count);
}

// ---- commands ----

int cmd_train_offline(const std::string& schema_path, const std::string& config_path, const std::string& out_dir,
                      std::optional<std::uint64_t> seed, std::ostream& out) {
  Bundle b;
  b.schema = load_schema_file(schema_path);
  b.config = config_for(config_path, b.schema, seed);
  auto result = train_offline(b.schema, b.config.deploy, b.config.train);
  CostModelBackend scorer(b.schema, b.config.deploy);
  b.offline_partitioning =
      recommend(result.agent, training_mix(b.config, b.schema.query_count()), b.schema, scorer, b.config.train.t_max).state;
  b.naive = std::move(result.agent);
  save_bundle(out_dir, b);
  write_log_file(fs::path(out_dir) / "train_log.jsonl", result.log);
  out << json{{"bundle", out_dir},
              {"phase", "offline"},
              {"episodes", b.config.train.episodes},
              {"transitions", result.log.size()},
              {"final_epsilon", b.naive.epsilon().value()}}
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_train_online(const std::string& schema_path, const std::string& config_path, const std::string& profile_path,
                     const std::string& warm_dir, const std::string& out_dir, const std::string& trace_path,
                     std::optional<std::uint64_t> seed, std::ostream& out) {
  Bundle b;
  b.phase = Bundle::Phase::kOnline;
  b.schema = load_schema_file(schema_path);
  b.config = config_for(config_path, b.schema, seed);
  if (!profile_path.empty()) {
    // A standalone profile document replaces the config's sim_profile section.
    auto doc = run_config_to_json(b.config);
    doc["sim_profile"] = read_json_file(profile_path);
    if (!doc["sim_profile"].contains("deploy")) doc["sim_profile"]["deploy"] = doc["deploy"];
    b.config = parse_run_config(doc);
    check_against_schema(b.config, b.schema);
  }

  std::optional<DqnAgent> warm;
  std::optional<RuntimeCache> warm_cache;
  b.offline_partitioning = reference_partitioning(b.schema);
  if (!warm_dir.empty()) {
    auto wb = load_bundle(warm_dir);
    if (wb.schema.fingerprint() != b.schema.fingerprint())
      throw InputError("warm-start bundle '" + warm_dir + "' was trained for a different schema");
    warm = std::move(wb.naive);
    b.offline_partitioning = wb.offline_partitioning;
    if (wb.phase == Bundle::Phase::kOnline) warm_cache = std::move(wb.cache);
  }

  OnlineSession session(b.schema, b.config.sim_profile, b.config.sampling, b.config.train.seed, b.offline_partitioning);
  if (warm_cache) session.cache() = std::move(*warm_cache);
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path, std::ios::binary);
    if (!trace) throw std::runtime_error("cannot write '" + trace_path + "'");
    session.set_trace(&trace);
  }
  auto result = train_online(session, b.config.train, warm);
  b.naive = std::move(result.agent);
  b.cache = session.cache();
  save_bundle(out_dir, b);
  write_log_file(fs::path(out_dir) / "train_log.jsonl", result.log);
  out << json{{"bundle", out_dir},
              {"phase", "online"},
              {"warm_start", warm.has_value()},
              {"initial_epsilon", result.log.empty() ? b.naive.epsilon().value() : result.log.front().epsilon},
              {"transitions", result.log.size()},
              {"executed_queries", session.cluster().executed_queries()},
              {"repartitions", session.cluster().repartitions()},
              {"cache_entries", session.cache().size()},
              {"cache_hits", session.cache().hits()},
              {"scale_factor_measurements", session.scale_factor_measurements()}}
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_derive_committee(const std::string& bundle_dir, const std::string& out_dir, std::optional<std::uint64_t> seed,
                         std::ostream& out) {
  auto b = load_bundle(bundle_dir);
  if (seed) b.config.train.seed = *seed;
  std::vector<TrainingResult> runs;
  std::int64_t executed = 0;
  auto build = [&](CostBackend& backend, OnlineBackend* online, CostBackend& scorer) {
    Committee c;
    c.references = derive_references(b.naive, b.schema, scorer, b.config.committee, b.config.train.t_max);
    runs = train_experts(b.naive, c.references, 0, b.schema, backend, online, b.config.train, b.config.committee);
    for (auto& r : runs) c.experts.push_back(r.agent);
    c.naive = b.naive;
    b.committee = std::move(c);
  };
  if (b.phase == Bundle::Phase::kOnline) {
    auto session = open_session(b);
    auto backend = session.backend(b.config.train.online);
    auto scorer = session.scorer();
    const auto before = session.cluster().executed_queries();
    build(backend, &backend, scorer);
    executed = session.cluster().executed_queries() - before;
    b.cache = session.cache();
  } else {
    CostModelBackend backend(b.schema, b.config.deploy);
    CostModelBackend scorer(b.schema, b.config.deploy);
    build(backend, nullptr, scorer);
  }
  const auto dir = out_dir.empty() ? bundle_dir : out_dir;
  save_bundle(dir, b);
  append_logs(fs::path(dir) / "committee_log.jsonl", runs);
  json refs = json::array();
  for (std::size_t k = 0; k < b.committee->references.size(); ++k)
    refs.push_back({{"designs", designs_json(b.committee->references.states[k], b.schema)},
                    {"probe_query", b.committee->references.probe_queries[k]}});
  out << json{{"bundle", dir}, {"references", refs}, {"experts", b.committee->experts.size()}, {"executed_queries", executed}}
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_extend_workload(const std::string& bundle_dir, const std::string& schema_path, const std::string& out_dir,
                        std::optional<std::uint64_t> seed, std::ostream& out) {
  auto b = load_bundle(bundle_dir);
  if (!b.committee) throw InputError("bundle '" + bundle_dir + "' has no committee; run derive-committee first");
  if (seed) b.config.train.seed = *seed;
  auto extended = load_schema_file(schema_path);
  const int old_m = b.schema.query_count();
  if (extended.query_count() <= old_m || extended.with_query_prefix(old_m).fingerprint() != b.schema.fingerprint())
    throw InputError(schema_path + ": must keep the bundle's tables, join predicates and queries and append new queries");
  check_against_schema(b.config, extended);

  ExtensionResult ext;
  std::int64_t executed = 0;
  if (b.phase == Bundle::Phase::kOnline) {
    auto session = open_session(b);
    session.extend(extended);
    auto backend = session.backend(b.config.train.online);
    auto scorer = session.scorer();
    const auto before = session.cluster().executed_queries();
    ext = extend_with_queries(*b.committee, session.schema(), backend, &backend, scorer, b.config.train, b.config.committee);
    executed = session.cluster().executed_queries() - before;
    b.cache = session.cache();
  } else {
    CostModelBackend backend(extended, b.config.deploy);
    CostModelBackend scorer(extended, b.config.deploy);
    ext = extend_with_queries(*b.committee, extended, backend, nullptr, scorer, b.config.train, b.config.committee);
  }
  b.schema = extended;
  b.naive = b.committee->naive;
  const auto dir = out_dir.empty() ? bundle_dir : out_dir;
  save_bundle(dir, b);
  std::vector<TrainingResult> runs{ext.naive_retraining};
  runs.insert(runs.end(), ext.refreshed_experts.begin(), ext.refreshed_experts.end());
  runs.insert(runs.end(), ext.new_experts.begin(), ext.new_experts.end());
  append_logs(fs::path(dir) / "extension_log.jsonl", runs);
  out << json{{"bundle", dir},
              {"queries", extended.query_count()},
              {"new_references", ext.new_references},
              {"refreshed_experts", ext.refreshed_experts.size()},
              {"experts", b.committee->experts.size()},
              {"executed_queries", executed}}
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_recommend(const std::string& bundle_dir, const std::string& mix_path, const std::string& format, std::ostream& out) {
  auto b = load_bundle(bundle_dir);
  const auto mix = load_mix(mix_path, b.schema.query_count());
  Recommendation rec;
  auto run = [&](CostBackend& scorer) {
    rec = b.committee ? recommend_committee(*b.committee, mix, b.schema, scorer, b.config.train.t_max)
                      : recommend(b.naive, mix, b.schema, scorer, b.config.train.t_max);
  };
  if (b.phase == Bundle::Phase::kOnline) {
    auto session = open_session(b);
    auto scorer = session.scorer();
    run(scorer);
  } else {
    CostModelBackend scorer(b.schema, b.config.deploy);
    run(scorer);
  }
  if (format == "table")
    out << report_table(rec, b.schema);
  else
    out << report_json(rec, b.schema).dump(2) << '\n';
  return kExitOk;
}

struct Scenario {
  std::string name;
  Schema schema;
  RunConfig config;
  std::optional<WorkloadMix> mix;
  bool online = true;
};

std::vector<Scenario> load_scenarios(const std::string& path, std::optional<std::uint64_t> seed) {
  const auto doc = read_json_file(path);
  const auto base = fs::path(path).parent_path();
  if (!doc.is_object() || !doc.contains("scenarios") || !doc["scenarios"].is_array())
    throw InputError(path + ": expected {\"scenarios\": [...]}");
  if (doc["scenarios"].empty()) throw InputError(path + ": scenarios: empty list");
  std::vector<Scenario> out;
  for (std::size_t i = 0; i < doc["scenarios"].size(); ++i) {
    const auto& js = doc["scenarios"][i];
    const std::string where = "scenarios[" + std::to_string(i) + "]";
    if (!js.is_object()) throw InputError(where + ": expected an object");
    for (const auto& [key, v] : js.items())
      if (key != "name" && key != "schema" && key != "config" && key != "mix" && key != "phase")
        throw InputError(where + "." + key + ": unknown field");
    Scenario s;
    s.name = js.value("name", "scenario" + std::to_string(i));
    auto doc_or_path = [&](const char* field) -> json {
      if (!js.contains(field)) return json();
      const auto& v = js[field];
      if (v.is_string()) return read_json_file((base / v.get<std::string>()).string());
      return v;
    };
    auto schema_doc = doc_or_path("schema");
    if (schema_doc.is_null()) throw InputError(where + ".schema: missing required field");
    try {
      s.schema = load_schema(schema_doc);
    } catch (const InputError& e) {
      throw InputError(where + ".schema: " + e.what());
    }
    auto config_doc = doc_or_path("config");
    s.config = config_doc.is_null() ? RunConfig{} : parse_run_config(config_doc);
    if (seed) s.config.train.seed = *seed;
    check_against_schema(s.config, s.schema);
    if (js.contains("mix")) {
      if (!js["mix"].is_array()) throw InputError(where + ".mix: expected an array");
      std::vector<double> raw;
      for (const auto& f : js["mix"]) {
        if (!f.is_number()) throw InputError(where + ".mix: expected numbers");
        raw.push_back(f.get<double>());
      }
      if (raw.size() != static_cast<std::size_t>(s.schema.query_count()))
        throw InputError(where + ".mix: expected " + std::to_string(s.schema.query_count()) + " frequencies");
      s.mix = WorkloadMix::from_raw(std::move(raw));
    }
    const auto phase = js.value("phase", std::string("online"));
    if (phase != "online" && phase != "offline") throw InputError(where + ".phase: expected \"online\" or \"offline\"");
    s.online = phase == "online";
    out.push_back(std::move(s));
  }
  return out;
}

int cmd_benchmark(const std::string& scenario_path, const std::string& format, std::optional<std::uint64_t> seed,
                  std::ostream& out) {
  const auto scenarios = load_scenarios(scenario_path, seed);
  json report = json::array();
  for (const auto& s : scenarios) {
    const auto mix = s.mix.value_or(WorkloadMix::uniform(s.schema.query_count()));
    auto offline = train_offline(s.schema, s.config.deploy, s.config.train);
    CostModelBackend model(s.schema, s.config.deploy);
    auto offline_rec = recommend(offline.agent, mix, s.schema, model, s.config.train.t_max);
    PartitioningState agent_state = offline_rec.state;
    if (s.online) {
      OnlineSession session(s.schema, s.config.sim_profile, s.config.sampling, s.config.train.seed, offline_rec.state);
      auto online = train_online(session, s.config.train, offline.agent);
      auto scorer = session.scorer();
      agent_state = recommend(online.agent, mix, s.schema, scorer, s.config.train.t_max).state;
    }

    SimulationBackend measured(SampledDatabase::full(s.schema), s.config.sim_profile, s.config.train.seed);
    const auto oracle = brute_force_optimal(s.schema, mix, measured);
    std::vector<std::pair<std::string, std::optional<PartitioningState>>> approaches;
    auto attempt = [&](const std::string& name, auto make) {
      try {
        approaches.emplace_back(name, make());
      } catch (const InputError&) {
        approaches.emplace_back(name, std::nullopt);
      }
    };
    attempt("heuristic_star_frequent", [&] { return heuristic_star(s.schema, StarMode::kMostFrequentJoin); });
    attempt("heuristic_star_largest", [&] { return heuristic_star(s.schema, StarMode::kLargestDimension); });
    attempt("heuristic_replicate_small", [&] { return heuristic_general(s.schema, GeneralMode::kReplicateSmall); });
    attempt("heuristic_greedy_pairs", [&] { return heuristic_general(s.schema, GeneralMode::kGreedyLargestPairs); });
    approaches.emplace_back("reference", reference_partitioning(s.schema));
    approaches.emplace_back(s.online ? "agent_online" : "agent_offline", agent_state);
    approaches.emplace_back("oracle", oracle.state);

    double slowest = 0.0;
    std::vector<double> runtimes;
    for (const auto& [name, state] : approaches) {
      const double r = state ? weighted_cost(measured.query_costs(*state), mix) : std::nan("");
      runtimes.push_back(r);
      if (state) slowest = std::max(slowest, r);
    }
    json rows = json::array();
    for (std::size_t i = 0; i < approaches.size(); ++i) {
      const auto& [name, state] = approaches[i];
      if (!state) {
        rows.push_back({{"approach", name}, {"available", false}});
        continue;
      }
      const bool optimal = state->same_designs(oracle.state) || runtimes[i] <= oracle.cost * (1.0 + 1e-12);
      rows.push_back({{"approach", name},
                      {"available", true},
                      {"runtime", runtimes[i]},
                      {"speedup_vs_slowest", slowest / runtimes[i]},
                      {"matches_oracle", optimal},
                      {"designs", designs_json(*state, s.schema)}});
    }
    report.push_back({{"scenario", s.name}, {"approaches", rows}});
  }

  if (format == "table") {
    for (const auto& sc : report) {
      out << "scenario " << sc["scenario"].get<std::string>() << '\n';
      out << std::left << std::setw(28) << "approach" << std::right << std::setw(14) << "runtime" << std::setw(10)
          << "speedup" << std::setw(8) << "oracle" << '\n';
      for (const auto& r : sc["approaches"]) {
        out << std::left << std::setw(28) << r["approach"].get<std::string>() << std::right;
        if (!r["available"].get<bool>()) {
          out << std::setw(14) << "n/a" << '\n';
          continue;
        }
        out << std::setw(14) << std::setprecision(6) << r["runtime"].get<double>() << std::setw(10) << std::setprecision(3)
            << r["speedup_vs_slowest"].get<double>() << std::setw(8) << (r["matches_oracle"].get<bool>() ? "yes" : "no")
            << '\n';
      }
    }
  } else {
    out << json{{"scenarios", report}}.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_validate_sampling(const std::string& schema_path, const std::string& config_path, const std::string& mix_path,
                          std::optional<double> rate, std::optional<std::uint64_t> seed, std::ostream& out) {
  const auto schema = load_schema_file(schema_path);
  auto cfg = config_for(config_path, schema, seed);
  if (rate) {
    if (!(*rate > 0.0 && *rate <= 1.0)) throw InputError("--rate: must lie in (0,1]");
    cfg.sampling.rates = {*rate};
  }
  const auto mix = mix_path.empty() ? WorkloadMix::uniform(schema.query_count()) : load_mix(mix_path, schema.query_count());
  std::vector<PartitioningState> candidates;
  try {
    candidates = enumerate_design_states(schema, 4096);
  } catch (const std::invalid_argument&) {
    candidates = {reference_partitioning(schema), heuristic_general(schema, GeneralMode::kReplicateSmall),
                  heuristic_general(schema, GeneralMode::kGreedyLargestPairs)};
  }
  const auto full = SampledDatabase::full(schema);
  const auto sample = cfg.sampling.sample(schema);
  const auto scale = compute_scale_factors(reference_partitioning(schema), full, sample, cfg.sim_profile, cfg.train.seed);
  const auto check = check_sampling(candidates, mix, full, sample, cfg.sim_profile, scale, cfg.train.seed);
  out << json{{"candidates", candidates.size()},
              {"sampling_rate", cfg.sampling.rates},
              {"pair_agreement", check.pair_agreement},
              {"same_best", check.same_best},
              {"scale_factors", scale}}
             .dump(2)
      << '\n';
  return kExitOk;
}

}  // namespace

void save_bundle(const std::string& dir, const Bundle& b) {
  const fs::path root(dir);
  fs::create_directories(root);
  json manifest{{"version", kBundleVersion},
                {"phase", b.phase == Bundle::Phase::kOnline ? "online" : "offline"},
                {"schema_fingerprint", hex64(b.schema.fingerprint())},
                {"schema", "schema.json"},
                {"config", "config.json"},
                {"naive", "naive.ckpt"},
                {"offline_partitioning", state_to_json(b.offline_partitioning)}};
  write_text(root / "schema.json", schema_to_json(b.schema).dump(2) + "\n");
  write_text(root / "config.json", run_config_to_json(b.config).dump(2) + "\n");
  b.naive.save((root / "naive.ckpt").string());
  if (b.committee) {
    json refs = json::array();
    const auto& c = *b.committee;
    for (std::size_t k = 0; k < c.references.size(); ++k) {
      const auto file = "expert_" + std::to_string(k) + ".ckpt";
      c.experts.at(k).save((root / file).string());
      auto r = state_to_json(c.references.states[k]);
      r["costs"] = c.references.costs[k];
      r["probe_query"] = c.references.probe_queries[k];
      r["expert"] = file;
      refs.push_back(std::move(r));
    }
    manifest["committee"] = {{"references", refs}};
  }
  if (b.phase == Bundle::Phase::kOnline) {
    write_text(root / "cache.json", b.cache.to_json().dump() + "\n");
    manifest["cache"] = "cache.json";
  }
  write_text(root / "manifest.json", manifest.dump(2) + "\n");
}

Bundle load_bundle(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw InputError("bundle '" + dir + "' is not a directory");
  const auto manifest = read_json_file((root / "manifest.json").string());
  Bundle b;
  try {
    if (manifest.at("version").get<int>() != kBundleVersion) throw InputError("bundle '" + dir + "': unsupported version");
    const auto phase = manifest.at("phase").get<std::string>();
    if (phase != "online" && phase != "offline") throw InputError("bundle '" + dir + "': unknown phase '" + phase + "'");
    b.phase = phase == "online" ? Bundle::Phase::kOnline : Bundle::Phase::kOffline;
    b.schema = load_schema_file((root / manifest.at("schema").get<std::string>()).string());
    b.config = load_run_config((root / manifest.at("config").get<std::string>()).string());
    const auto fp = b.schema.fingerprint();
    b.naive = DqnAgent::load((root / manifest.at("naive").get<std::string>()).string(), fp);
    b.offline_partitioning = state_from_json(manifest.at("offline_partitioning"), b.schema, "manifest.offline_partitioning");
    if (manifest.contains("committee")) {
      Committee c;
      c.naive = b.naive;
      const auto& refs = manifest["committee"].at("references");
      for (std::size_t k = 0; k < refs.size(); ++k) {
        const auto& r = refs[k];
        c.references.states.push_back(
            state_from_json(r, b.schema, "manifest.committee.references[" + std::to_string(k) + "]"));
        c.references.costs.push_back(r.at("costs").get<std::vector<double>>());
        c.references.probe_queries.push_back(r.at("probe_query").get<int>());
        c.experts.push_back(DqnAgent::load((root / r.at("expert").get<std::string>()).string(), fp));
      }
      b.committee = std::move(c);
    }
    if (b.phase == Bundle::Phase::kOnline)
      b.cache = RuntimeCache::from_json(read_json_file((root / manifest.at("cache").get<std::string>()).string()));
  } catch (const json::exception& e) {
    throw InputError("bundle '" + dir + "': malformed manifest: " + e.what());
  }
  return b;
}

OnlineSession open_session(const Bundle& b) {
  OnlineSession session(b.schema, b.config.sim_profile, b.config.sampling, b.config.train.seed, b.offline_partitioning);
  session.cache() = b.cache;
  return session;
}

WorkloadMix load_mix(const std::string& path, int query_count) {
  const auto doc = read_json_file(path);
  const json* arr = &doc;
  if (doc.is_object()) {
    if (!doc.contains("frequencies")) throw InputError(path + ": expected an array or {\"frequencies\": [...]}");
    arr = &doc["frequencies"];
  }
  if (!arr->is_array()) throw InputError(path + ": frequencies must be an array");
  std::vector<double> raw;
  for (const auto& f : *arr) {
    if (!f.is_number()) throw InputError(path + ": frequencies must be numbers");
    raw.push_back(f.get<double>());
  }
  if (raw.size() != static_cast<std::size_t>(query_count))
    throw InputError(path + ": mix has " + std::to_string(raw.size()) + " frequencies, the workload has " +
                     std::to_string(query_count) + " queries");
  try {
    return WorkloadMix::from_raw(std::move(raw));
  } catch (const std::invalid_argument& e) {
    throw InputError(path + ": " + e.what());
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Partitioning advisor for distributed analytical databases"};
  app.require_subcommand(1);

  std::string schema_path, config_path, out_dir, bundle_dir, mix_path, profile_path, warm_dir, trace_path, scenario_path;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  std::optional<double> rate;

  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", seed, "Override the training seed"); };

  auto* train_off = app.add_subcommand("train-offline", "Train an agent on the cost model");
  train_off->add_option("--schema", schema_path, "Schema document")->required();
  train_off->add_option("--config", config_path, "Run configuration document");
  train_off->add_option("--out", out_dir, "Bundle directory to write")->required();
  add_seed(train_off);

  auto* train_on = app.add_subcommand("train-online", "Train against the simulated cluster");
  train_on->add_option("--schema", schema_path, "Schema document")->required();
  train_on->add_option("--config", config_path, "Run configuration document");
  train_on->add_option("--profile", profile_path, "Simulator profile document replacing the config's sim_profile");
  train_on->add_option("--warm", warm_dir, "Bundle to warm-start from");
  train_on->add_option("--out", out_dir, "Bundle directory to write")->required();
  train_on->add_option("--trace", trace_path, "Write the per-step simulator trace here");
  add_seed(train_on);

  auto* derive = app.add_subcommand("derive-committee", "Derive reference partitionings and train experts");
  derive->add_option("--bundle", bundle_dir, "Trained bundle")->required();
  derive->add_option("--out", out_dir, "Write the result here instead of updating the bundle");
  add_seed(derive);

  auto* extend = app.add_subcommand("extend-workload", "Add new queries to a committee bundle");
  extend->add_option("--bundle", bundle_dir, "Committee bundle")->required();
  extend->add_option("--schema", schema_path, "Schema with the new queries appended")->required();
  extend->add_option("--out", out_dir, "Write the result here instead of updating the bundle");
  add_seed(extend);

  auto* rec = app.add_subcommand("recommend", "Recommend a partitioning for a workload mix");
  rec->add_option("--bundle", bundle_dir, "Trained bundle")->required();
  rec->add_option("--mix", mix_path, "Mix document")->required();
  rec->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}));
  add_seed(rec);

  auto* bench = app.add_subcommand("benchmark", "Compare baselines, the agent and the oracle");
  bench->add_option("--scenario", scenario_path, "Scenario document")->required();
  bench->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}));
  add_seed(bench);

  auto* vs = app.add_subcommand("validate-sampling", "Check that a sample ranks partitionings like the full data");
  vs->add_option("--schema", schema_path, "Schema document")->required();
  vs->add_option("--config", config_path, "Run configuration document");
  vs->add_option("--mix", mix_path, "Mix document (default: uniform)");
  vs->add_option("--rate", rate, "Sampling rate overriding the config");
  add_seed(vs);

  std::vector<const char*> argv{"partadvisor"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*train_off) return cmd_train_offline(schema_path, config_path, out_dir, seed, out);
    if (*train_on) return cmd_train_online(schema_path, config_path, profile_path, warm_dir, out_dir, trace_path, seed, out);
    if (*derive) return cmd_derive_committee(bundle_dir, out_dir, seed, out);
    if (*extend) return cmd_extend_workload(bundle_dir, schema_path, out_dir, seed, out);
    if (*rec) return cmd_recommend(bundle_dir, mix_path, format, out);
    if (*bench) return cmd_benchmark(scenario_path, format, seed, out);
    if (*vs) return cmd_validate_sampling(schema_path, config_path, mix_path, rate, seed, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitInput;
}

}  // namespace partadvisor
