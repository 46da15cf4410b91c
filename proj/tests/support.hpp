#pragma once

#include <string>

#include "json.hpp"
#include "partadvisor/schema.hpp"

namespace partadvisor::testing {

inline std::string data_path(const std::string& name) { return std::string(PARTADVISOR_TEST_DATA) + "/" + name; }

inline Schema load_data(const std::string& name) { return load_schema_file(data_path(name)); }

inline Schema parse(const std::string& text) { return load_schema(nlohmann::json::parse(text)); }

inline PartitioningState state_of(const Schema& schema, std::initializer_list<int> slots) {
  auto p = reference_partitioning(schema);
  std::size_t i = 0;
  for (int s : slots) p.designs[i++] = TableDesign::from_slot(s);
  return with_implied_edges(p, schema);
}

}  // namespace partadvisor::testing
