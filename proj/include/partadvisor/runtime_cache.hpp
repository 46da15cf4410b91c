#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "json.hpp"
#include "partadvisor/schema.hpp"

namespace partadvisor {

/// Measured sample runtimes keyed by (query, designs of the tables that query scans).
/// Designs of other tables and all edge bits are not part of the key.
class RuntimeCache {
 public:
  struct Key {
    int query = 0;
    /// Design slots of the query's scanned tables, in table order.
    std::vector<int> slots;
    auto operator<=>(const Key&) const = default;
  };

  static Key key_for(const Query& q, const PartitioningState& p);

  /// Counts a hit or a miss.
  std::optional<double> lookup(const Query& q, const PartitioningState& p);
  /// Read-only lookup without touching the counters; safe for concurrent readers.
  std::optional<double> peek(const Query& q, const PartitioningState& p) const;
  bool contains(const Key& key) const { return entries_.contains(key); }
  /// Upsert; values are deterministic so the last writer wins.
  void insert(const Query& q, const PartitioningState& p, double runtime);

  std::size_t size() const { return entries_.size(); }
  std::int64_t hits() const { return hits_; }
  std::int64_t misses() const { return misses_; }
  const std::map<Key, double>& entries() const { return entries_; }

  nlohmann::json to_json() const;
  static RuntimeCache from_json(const nlohmann::json& doc);

  bool same_entries(const RuntimeCache& other) const { return entries_ == other.entries_; }

 private:
  std::map<Key, double> entries_;
  std::int64_t hits_ = 0;
  std::int64_t misses_ = 0;
};

}  // namespace partadvisor
