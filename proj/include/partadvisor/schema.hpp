#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace partadvisor {

/// Raised for malformed or inconsistent input documents (schema, config, mix).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Attribute {
  std::string name;
  std::int64_t distinct_values = 1;
};

struct Table {
  std::string name;
  std::int64_t row_count = 0;
  std::int64_t row_width = 1;
  /// Order is fixed and defines the one-hot positions of the table's design block.
  std::vector<Attribute> attributes;
  int primary_key = 0;
  /// Declared composite partitioning keys as attribute index lists.
  std::vector<std::vector<int>> composite_keys;
  bool fact = false;

  /// Partitioning keys are the attributes followed by the composite keys.
  int key_count() const { return static_cast<int>(attributes.size() + composite_keys.size()); }
  bool is_composite_key(int key) const { return key >= static_cast<int>(attributes.size()); }
  /// Attribute name, or the member names joined by '+' for composite keys.
  std::string key_name(int key) const;
  /// Distinct value estimate of a key (product over members for composites).
  double key_distinct_values(int key) const;
  int find_attribute(std::string_view attr) const;
  double bytes() const { return static_cast<double>(row_count) * static_cast<double>(row_width); }
};

struct JoinEdge {
  int id = 0;
  int left_table = 0;
  int left_attr = 0;
  int right_table = 0;
  int right_attr = 0;

  bool touches(int table) const { return left_table == table || right_table == table; }
  /// Attribute this edge requires on `table`; pre: touches(table).
  int attr_for(int table) const { return table == left_table ? left_attr : right_attr; }
  int other(int table) const { return table == left_table ? right_table : left_table; }
};

struct ScannedTable {
  int table = 0;
  double selectivity = 1.0;
};

struct Query {
  int id = 0;
  std::vector<int> edges;
  /// Sorted by table index.
  std::vector<ScannedTable> tables;
  double weight = 1.0;

  bool scans(int table) const;
  double selectivity_of(int table) const;
};

/// Normalized query frequencies: the maximum entry is exactly 1 unless all are 0.
class WorkloadMix {
 public:
  WorkloadMix() = default;

  /// Divides raw non-negative frequencies by their maximum.
  static WorkloadMix from_raw(std::vector<double> raw);
  /// All queries equally frequent.
  static WorkloadMix uniform(int query_count);

  std::size_t size() const { return freqs_.size(); }
  double operator[](std::size_t i) const { return freqs_[i]; }
  const std::vector<double>& frequencies() const { return freqs_; }
  bool all_zero() const;

  bool operator==(const WorkloadMix&) const = default;

 private:
  explicit WorkloadMix(std::vector<double> f) : freqs_(std::move(f)) {}
  std::vector<double> freqs_;
};

/// Either Replicated or PartitionedBy(key). Slot 0 is replication, slot k+1 partition key k;
/// this matches the one-hot position inside a table's encoded block.
class TableDesign {
 public:
  static TableDesign replicated() { return TableDesign(0); }
  static TableDesign partitioned_by(int key) { return TableDesign(key + 1); }
  static TableDesign from_slot(int slot) { return TableDesign(slot); }

  bool is_replicated() const { return slot_ == 0; }
  int partition_key() const { return slot_ - 1; }
  int slot() const { return slot_; }

  auto operator<=>(const TableDesign&) const = default;

 private:
  explicit TableDesign(int slot) : slot_(slot) {}
  int slot_ = 0;
};

struct PartitioningState {
  std::vector<TableDesign> designs;
  std::vector<bool> active_edges;

  bool is_active(int edge) const { return active_edges[static_cast<std::size_t>(edge)]; }
  bool operator==(const PartitioningState&) const = default;
  /// Equality on table designs only; edges are scaffolding and never change costs.
  bool same_designs(const PartitioningState& other) const { return designs == other.designs; }
};

class Schema {
 public:
  Schema() = default;
  Schema(std::vector<Table> tables, std::vector<JoinEdge> edges, std::vector<Query> queries);

  const std::vector<Table>& tables() const { return tables_; }
  const std::vector<JoinEdge>& edges() const { return edges_; }
  const std::vector<Query>& queries() const { return queries_; }
  const Table& table(int i) const { return tables_[static_cast<std::size_t>(i)]; }
  const JoinEdge& edge(int i) const { return edges_[static_cast<std::size_t>(i)]; }
  const Query& query(int i) const { return queries_[static_cast<std::size_t>(i)]; }
  int table_count() const { return static_cast<int>(tables_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int query_count() const { return static_cast<int>(queries_.size()); }

  /// Index of the named table, or -1.
  int find_table(std::string_view name) const;
  /// Same schema with every table's row_count replaced.
  Schema with_row_counts(const std::vector<std::int64_t>& rows) const;
  /// Same tables and edges, only the first `count` queries.
  Schema with_query_prefix(int count) const;
  /// Stable hash over tables, keys, edges and query count. Checkpoints refuse a mismatch.
  std::uint64_t fingerprint() const;

 private:
  std::vector<Table> tables_;
  std::vector<JoinEdge> edges_;
  std::vector<Query> queries_;
};

Schema load_schema(const nlohmann::json& document);
Schema load_schema_file(const std::string& path);
nlohmann::json schema_to_json(const Schema& schema);

/// P_0: every table partitioned by its primary key, no active edges.
PartitioningState reference_partitioning(const Schema& schema);

struct Violation {
  enum class Kind {
    kShape,               // wrong number of designs or edge bits
    kInvalidKey,          // partition key out of range for the table
    kEdgeConflict,        // two active edges require different keys on one table
    kReplicatedEndpoint,  // active edge touches a replicated table
    kDesignMismatch,      // active edge endpoint not partitioned by the edge attribute
  };
  Kind kind;
  std::string message;
};

std::vector<Violation> validate_state(const PartitioningState& p, const Schema& schema);
inline bool is_valid(const PartitioningState& p, const Schema& schema) {
  return validate_state(p, schema).empty();
}

/// Every table-design combination with exactly the edges its designs imply, in
/// lexicographic slot order. Throws if the combination count exceeds `limit`.
std::vector<PartitioningState> enumerate_design_states(const Schema& schema, std::size_t limit = 1'000'000);
/// Marks every edge whose both endpoints are partitioned by its attributes as active.
PartitioningState with_implied_edges(PartitioningState p, const Schema& schema);

std::string describe_design(const Schema& schema, int table, TableDesign design);

}  // namespace partadvisor
