#include "partadvisor/runtime_cache.hpp"

namespace partadvisor {

RuntimeCache::Key RuntimeCache::key_for(const Query& q, const PartitioningState& p) {
  Key k;
  k.query = q.id;
  k.slots.reserve(q.tables.size());
  for (const auto& st : q.tables) k.slots.push_back(p.designs[static_cast<std::size_t>(st.table)].slot());
  return k;
}

std::optional<double> RuntimeCache::lookup(const Query& q, const PartitioningState& p) {
  auto v = peek(q, p);
  if (v)
    ++hits_;
  else
    ++misses_;
  return v;
}

std::optional<double> RuntimeCache::peek(const Query& q, const PartitioningState& p) const {
  auto it = entries_.find(key_for(q, p));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void RuntimeCache::insert(const Query& q, const PartitioningState& p, double runtime) {
  entries_[key_for(q, p)] = runtime;
}

nlohmann::json RuntimeCache::to_json() const {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["entries"] = nlohmann::json::array();
  for (const auto& [key, runtime] : entries_)
    doc["entries"].push_back({{"query", key.query}, {"designs", key.slots}, {"runtime", runtime}});
  return doc;
}

RuntimeCache RuntimeCache::from_json(const nlohmann::json& doc) {
  RuntimeCache cache;
  try {
    if (doc.at("version").get<int>() != 1) throw InputError("runtime cache: unsupported version");
    for (const auto& e : doc.at("entries")) {
      Key k;
      k.query = e.at("query").get<int>();
      k.slots = e.at("designs").get<std::vector<int>>();
      cache.entries_[std::move(k)] = e.at("runtime").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("runtime cache: malformed document: ") + e.what());
  }
  return cache;
}

}  // namespace partadvisor
