#include "partadvisor/cluster_sim.hpp"

#include <cmath>
#include <stdexcept>

namespace partadvisor {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1), a pure function of the query's runtime-relevant inputs.
double noise_unit(std::uint64_t seed, const PartitioningState& p, const Query& q, const Schema& schema) {
  std::uint64_t h = splitmix64(seed ^ 0x5EEDULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(q.id));
  for (const auto& st : q.tables) {
    h = splitmix64(h ^ static_cast<std::uint64_t>(st.table));
    h = splitmix64(h ^ static_cast<std::uint64_t>(p.designs[static_cast<std::size_t>(st.table)].slot()));
    h = splitmix64(h ^ static_cast<std::uint64_t>(schema.table(st.table).row_count));
  }
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace

void SimProfile::validate() const {
  deploy.validate();
  for (const auto& [table, e] : scan_exponent)
    if (!(e > 0.0)) throw std::invalid_argument("sim_profile.scan_exponent for " + table + " must be positive");
  if (!(shuffle_latency >= 0.0)) throw std::invalid_argument("sim_profile.shuffle_latency must be >= 0");
  if (!(replication_scan_penalty > 0.0)) throw std::invalid_argument("sim_profile.replication_scan_penalty must be positive");
  if (!(noise_fraction >= 0.0 && noise_fraction <= 0.05))
    throw std::invalid_argument("sim_profile.noise_fraction must lie in [0, 0.05]");
}

bool SimProfile::is_neutral() const {
  for (const auto& [table, e] : scan_exponent)
    if (e != 1.0) return false;
  return shuffle_latency == 0.0 && replication_scan_penalty == 1.0 && noise_fraction == 0.0;
}

SampledDatabase SampledDatabase::full(const Schema& base) {
  SampledDatabase db;
  db.schema_ = base;
  db.rates_.assign(base.tables().size(), 1.0);
  return db;
}

SampledDatabase SampledDatabase::sample(const Schema& base, const std::vector<double>& rates, std::int64_t min_rows) {
  if (rates.size() != base.tables().size()) throw std::invalid_argument("one sampling rate per table required");
  std::vector<std::int64_t> rows;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] > 0.0 && rates[i] <= 1.0)) throw std::invalid_argument("sampling rates must lie in (0, 1]");
    const auto full_rows = base.tables()[i].row_count;
    auto r = static_cast<std::int64_t>(std::ceil(rates[i] * static_cast<double>(full_rows)));
    r = std::min(std::max(r, min_rows), full_rows);
    rows.push_back(r);
  }
  SampledDatabase db;
  db.schema_ = base.with_row_counts(rows);
  db.rates_ = rates;
  return db;
}

SampledDatabase SampledDatabase::sample(const Schema& base, double rate, std::int64_t min_rows) {
  return sample(base, std::vector<double>(base.tables().size(), rate), min_rows);
}

double simulate_query(const PartitioningState& p, const Query& q, const SampledDatabase& db, const SimProfile& profile,
                      std::uint64_t seed) {
  const auto& schema = db.schema();
  auto detail = detail_query_cost(p, q, schema, profile.deploy);

  for (std::size_t i = 0; i < detail.scans.size(); ++i) {
    const auto& t = schema.table(detail.scanned_tables[i]);
    const auto design = p.designs[static_cast<std::size_t>(detail.scanned_tables[i])];
    if (auto it = profile.scan_exponent.find(t.name); it != profile.scan_exponent.end() && it->second != 1.0) {
      const double per_node = design.is_replicated() ? t.bytes() : t.bytes() / profile.deploy.node_count;
      detail.scans[i] *= std::pow(std::max(per_node, 1.0), it->second - 1.0);
    }
    if (design.is_replicated() && profile.replication_scan_penalty != 1.0) detail.scans[i] *= profile.replication_scan_penalty;
  }
  if (profile.shuffle_latency != 0.0) {
    for (auto& j : detail.joins)
      if (j.shuffle > 0.0) j.shuffle += profile.shuffle_latency;
  }

  double runtime = detail.summarize().total;
  if (profile.noise_fraction != 0.0) runtime *= 1.0 + profile.noise_fraction * noise_unit(seed, p, q, schema);
  return runtime;
}

double repartition_time(const SampledDatabase& db, const DeploymentConfig& deploy, int table, TableDesign from,
                        TableDesign to) {
  if (from == to) return 0.0;
  const double bytes = db.schema().table(table).bytes();
  const double n = deploy.node_count;
  if (to.is_replicated()) return bytes * (n - 1.0) / deploy.network_bandwidth;
  return bytes * (n - 1.0) / n / deploy.network_bandwidth;
}

ClusterSimulator::ClusterSimulator(SampledDatabase db, SimProfile profile, std::uint64_t seed)
    : db_(std::move(db)), profile_(std::move(profile)), seed_(seed) {
  profile_.validate();
  deployed_ = reference_partitioning(db_.schema()).designs;
}

void ClusterSimulator::replace_database(SampledDatabase db) {
  if (db.schema().table_count() != db_.schema().table_count())
    throw std::invalid_argument("replacement database must have the same tables");
  db_ = std::move(db);
}

double ClusterSimulator::repartition_table(int table, TableDesign design) {
  auto& current = deployed_.at(static_cast<std::size_t>(table));
  if (current == design) return 0.0;
  const double t = repartition_time(db_, profile_.deploy, table, current, design);
  current = design;
  ++repartitions_;
  repartition_seconds_ += t;
  return t;
}

double ClusterSimulator::run_query(const PartitioningState& p, int q) {
  const auto& query = db_.schema().query(q);
  for (const auto& st : query.tables) {
    if (deployed_[static_cast<std::size_t>(st.table)] != p.designs[static_cast<std::size_t>(st.table)])
      throw std::logic_error("query " + std::to_string(q) + " scans '" + db_.schema().table(st.table).name +
                             "' which is not deployed in the requested design");
  }
  const double t = simulate_query(p, query, db_, profile_, seed_);
  ++executed_queries_;
  query_seconds_ += t;
  return t;
}

std::vector<double> compute_scale_factors(const PartitioningState& p_offline, const SampledDatabase& full,
                                          const SampledDatabase& sample, const SimProfile& profile,
                                          std::uint64_t seed) {
  if (full.schema().query_count() != sample.schema().query_count() ||
      full.schema().table_count() != sample.schema().table_count())
    throw std::invalid_argument("full and sampled databases must share the schema");
  std::vector<double> s;
  for (int j = 0; j < full.schema().query_count(); ++j) {
    const double c_full = simulate_query(p_offline, full.schema().query(j), full, profile, seed);
    const double c_sample = simulate_query(p_offline, sample.schema().query(j), sample, profile, seed);
    if (!(c_sample > 0.0)) throw std::domain_error("query " + std::to_string(j) + " has zero runtime on the sample");
    s.push_back(c_full == c_sample ? 1.0 : c_full / c_sample);
  }
  return s;
}

SamplingCheck check_sampling(const std::vector<PartitioningState>& candidates, const WorkloadMix& mix,
                             const SampledDatabase& full, const SampledDatabase& sample, const SimProfile& profile,
                             const std::vector<double>& scale_factors, std::uint64_t seed) {
  const auto m = static_cast<std::size_t>(full.schema().query_count());
  if (mix.size() != m || scale_factors.size() != m) throw std::invalid_argument("mix and scale factors must cover every query");
  SamplingCheck out;
  for (const auto& p : candidates) {
    double f = 0.0, s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (mix[j] == 0.0) continue;
      f += mix[j] * simulate_query(p, full.schema().query(static_cast<int>(j)), full, profile, seed);
      s += mix[j] * scale_factors[j] * simulate_query(p, sample.schema().query(static_cast<int>(j)), sample, profile, seed);
    }
    out.full_runtimes.push_back(f);
    out.weighted_sample_runtimes.push_back(s);
  }
  std::size_t pairs = 0, agree = 0;
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    for (std::size_t b = a + 1; b < candidates.size(); ++b) {
      ++pairs;
      const double df = out.full_runtimes[a] - out.full_runtimes[b];
      const double ds = out.weighted_sample_runtimes[a] - out.weighted_sample_runtimes[b];
      if ((df < 0) == (ds < 0) && (df > 0) == (ds > 0)) ++agree;
    }
  }
  out.pair_agreement = pairs == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(pairs);
  if (!candidates.empty()) {
    std::size_t bf = 0, bs = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      if (out.full_runtimes[i] < out.full_runtimes[bf]) bf = i;
      if (out.weighted_sample_runtimes[i] < out.weighted_sample_runtimes[bs]) bs = i;
    }
    out.same_best = bf == bs;
  }
  return out;
}

}  // namespace partadvisor
