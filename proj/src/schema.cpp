#include "partadvisor/schema.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace partadvisor {

using nlohmann::json;

namespace {

void reject_unknown_fields(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw InputError(where + "." + key + ": unknown field");
  }
}

const json& required(const json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end()) throw InputError(where + "." + field + ": missing required field");
  return *it;
}

std::string string_field(const json& obj, const char* field, const std::string& where) {
  const auto& v = required(obj, field, where);
  if (!v.is_string()) throw InputError(where + "." + field + ": expected a string");
  auto s = v.get<std::string>();
  if (s.empty()) throw InputError(where + "." + field + ": must not be empty");
  return s;
}

std::int64_t integer_field(const json& obj, const char* field, const std::string& where) {
  const auto& v = required(obj, field, where);
  if (!v.is_number_integer()) throw InputError(where + "." + field + ": expected an integer");
  return v.get<std::int64_t>();
}

double number_field(const json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + ": expected a number");
  return v.get<double>();
}

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string Table::key_name(int key) const {
  if (!is_composite_key(key)) return attributes[static_cast<std::size_t>(key)].name;
  std::string name;
  for (int a : composite_keys[static_cast<std::size_t>(key) - attributes.size()]) {
    if (!name.empty()) name += '+';
    name += attributes[static_cast<std::size_t>(a)].name;
  }
  return name;
}

double Table::key_distinct_values(int key) const {
  if (!is_composite_key(key)) return static_cast<double>(attributes[static_cast<std::size_t>(key)].distinct_values);
  double d = 1.0;
  for (int a : composite_keys[static_cast<std::size_t>(key) - attributes.size()])
    d *= static_cast<double>(attributes[static_cast<std::size_t>(a)].distinct_values);
  return d;
}

int Table::find_attribute(std::string_view attr) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i].name == attr) return static_cast<int>(i);
  return -1;
}

bool Query::scans(int table) const {
  return std::any_of(tables.begin(), tables.end(), [&](const ScannedTable& t) { return t.table == table; });
}

double Query::selectivity_of(int table) const {
  for (const auto& t : tables)
    if (t.table == table) return t.selectivity;
  return 0.0;
}

WorkloadMix WorkloadMix::from_raw(std::vector<double> raw) {
  double hi = 0.0;
  for (double f : raw) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw InputError("workload mix: frequencies must be finite and non-negative");
    hi = std::max(hi, f);
  }
  if (hi > 0.0) {
    for (double& f : raw) f = (f == hi) ? 1.0 : f / hi;
  }
  return WorkloadMix(std::move(raw));
}

WorkloadMix WorkloadMix::uniform(int query_count) {
  return WorkloadMix(std::vector<double>(static_cast<std::size_t>(query_count), 1.0));
}

bool WorkloadMix::all_zero() const {
  return std::all_of(freqs_.begin(), freqs_.end(), [](double f) { return f == 0.0; });
}

Schema::Schema(std::vector<Table> tables, std::vector<JoinEdge> edges, std::vector<Query> queries)
    : tables_(std::move(tables)), edges_(std::move(edges)), queries_(std::move(queries)) {}

int Schema::find_table(std::string_view name) const {
  for (std::size_t i = 0; i < tables_.size(); ++i)
    if (tables_[i].name == name) return static_cast<int>(i);
  return -1;
}

Schema Schema::with_row_counts(const std::vector<std::int64_t>& rows) const {
  if (rows.size() != tables_.size()) throw std::invalid_argument("with_row_counts: one row count per table required");
  Schema s = *this;
  for (std::size_t i = 0; i < rows.size(); ++i) s.tables_[i].row_count = rows[i];
  return s;
}

Schema Schema::with_query_prefix(int count) const {
  if (count < 0 || count > query_count()) throw std::invalid_argument("with_query_prefix: count out of range");
  Schema s = *this;
  s.queries_.resize(static_cast<std::size_t>(count));
  return s;
}

std::uint64_t Schema::fingerprint() const {
  std::ostringstream os;
  for (const auto& t : tables_) {
    os << "T:" << t.name << ';';
    for (int k = 0; k < t.key_count(); ++k) os << t.key_name(k) << ',';
  }
  for (const auto& e : edges_) os << "E:" << e.left_table << '.' << e.left_attr << '-' << e.right_table << '.' << e.right_attr << ';';
  os << "Q:" << queries_.size();
  return fnv1a(14695981039346656037ULL, os.str());
}

Schema load_schema(const json& doc) {
  reject_unknown_fields(doc, {"tables", "join_predicates", "queries"}, "schema");

  const auto& jtables = required(doc, "tables", "schema");
  if (!jtables.is_array() || jtables.empty()) throw InputError("schema.tables: expected a non-empty array");

  std::vector<Table> tables;
  std::set<std::string> table_names;
  for (std::size_t ti = 0; ti < jtables.size(); ++ti) {
    const std::string where = "tables[" + std::to_string(ti) + "]";
    const auto& jt = jtables[ti];
    reject_unknown_fields(jt, {"name", "row_count", "row_width", "attributes", "primary_key", "composite_keys", "fact"}, where);
    Table t;
    t.name = string_field(jt, "name", where);
    if (!table_names.insert(t.name).second) throw InputError(where + ".name: duplicate table name '" + t.name + "'");
    t.row_count = integer_field(jt, "row_count", where);
    if (t.row_count < 0) throw InputError(where + ".row_count: must be >= 0");
    t.row_width = integer_field(jt, "row_width", where);
    if (t.row_width < 1) throw InputError(where + ".row_width: must be >= 1");

    const auto& jattrs = required(jt, "attributes", where);
    if (!jattrs.is_array() || jattrs.empty()) throw InputError(where + ".attributes: expected a non-empty array");
    for (std::size_t ai = 0; ai < jattrs.size(); ++ai) {
      const std::string awhere = where + ".attributes[" + std::to_string(ai) + "]";
      reject_unknown_fields(jattrs[ai], {"name", "distinct_values"}, awhere);
      Attribute a;
      a.name = string_field(jattrs[ai], "name", awhere);
      a.distinct_values = integer_field(jattrs[ai], "distinct_values", awhere);
      if (a.distinct_values < 1) throw InputError(awhere + ".distinct_values: must be >= 1");
      if (t.find_attribute(a.name) >= 0) throw InputError(awhere + ".name: duplicate attribute '" + a.name + "'");
      t.attributes.push_back(std::move(a));
    }

    if (auto it = jt.find("primary_key"); it != jt.end()) {
      if (!it->is_string()) throw InputError(where + ".primary_key: expected a string");
      t.primary_key = t.find_attribute(it->get<std::string>());
      if (t.primary_key < 0) throw InputError(where + ".primary_key: unknown attribute '" + it->get<std::string>() + "'");
    }
    if (auto it = jt.find("composite_keys"); it != jt.end()) {
      if (!it->is_array()) throw InputError(where + ".composite_keys: expected an array");
      for (std::size_t ci = 0; ci < it->size(); ++ci) {
        const std::string cwhere = where + ".composite_keys[" + std::to_string(ci) + "]";
        const auto& jc = (*it)[ci];
        if (!jc.is_array() || jc.size() < 2) throw InputError(cwhere + ": expected at least two attribute names");
        std::vector<int> members;
        for (const auto& jm : jc) {
          if (!jm.is_string()) throw InputError(cwhere + ": expected attribute names");
          int a = t.find_attribute(jm.get<std::string>());
          if (a < 0) throw InputError(cwhere + ": unknown attribute '" + jm.get<std::string>() + "'");
          if (std::find(members.begin(), members.end(), a) != members.end())
            throw InputError(cwhere + ": repeated attribute '" + jm.get<std::string>() + "'");
          members.push_back(a);
        }
        t.composite_keys.push_back(std::move(members));
      }
    }
    if (auto it = jt.find("fact"); it != jt.end()) {
      if (!it->is_boolean()) throw InputError(where + ".fact: expected a boolean");
      t.fact = it->get<bool>();
    }
    tables.push_back(std::move(t));
  }

  auto resolve = [&](const json& ref, const std::string& where) -> std::pair<int, int> {
    if (!ref.is_string()) throw InputError(where + ": expected \"table.attribute\"");
    const auto s = ref.get<std::string>();
    const auto dot = s.find('.');
    if (dot == std::string::npos) throw InputError(where + ": expected \"table.attribute\", got '" + s + "'");
    const auto tname = s.substr(0, dot);
    const auto aname = s.substr(dot + 1);
    int ti = -1;
    for (std::size_t i = 0; i < tables.size(); ++i)
      if (tables[i].name == tname) ti = static_cast<int>(i);
    if (ti < 0) throw InputError(where + ": unknown table '" + tname + "'");
    int ai = tables[static_cast<std::size_t>(ti)].find_attribute(aname);
    if (ai < 0) throw InputError(where + ": table '" + tname + "' has no attribute '" + aname + "'");
    return {ti, ai};
  };

  std::vector<JoinEdge> edges;
  if (auto it = doc.find("join_predicates"); it != doc.end()) {
    if (!it->is_array()) throw InputError("schema.join_predicates: expected an array");
    for (std::size_t ei = 0; ei < it->size(); ++ei) {
      const std::string where = "join_predicates[" + std::to_string(ei) + "]";
      const auto& jp = (*it)[ei];
      reject_unknown_fields(jp, {"left", "right"}, where);
      auto [lt, la] = resolve(required(jp, "left", where), where + ".left");
      auto [rt, ra] = resolve(required(jp, "right", where), where + ".right");
      if (lt == rt) throw InputError(where + ": self-joins are not supported");
      for (const auto& e : edges) {
        bool same = (e.left_table == lt && e.left_attr == la && e.right_table == rt && e.right_attr == ra) ||
                    (e.left_table == rt && e.left_attr == ra && e.right_table == lt && e.right_attr == la);
        if (same) throw InputError(where + ": duplicates join_predicates[" + std::to_string(e.id) + "]");
      }
      edges.push_back(JoinEdge{static_cast<int>(ei), lt, la, rt, ra});
    }
  }

  std::vector<Query> queries;
  if (auto it = doc.find("queries"); it != doc.end()) {
    if (!it->is_array()) throw InputError("schema.queries: expected an array");
    for (std::size_t qi = 0; qi < it->size(); ++qi) {
      const std::string where = "queries[" + std::to_string(qi) + "]";
      const auto& jq = (*it)[qi];
      reject_unknown_fields(jq, {"id", "tables", "edges", "weight"}, where);
      Query q;
      q.id = static_cast<int>(integer_field(jq, "id", where));
      if (q.id != static_cast<int>(qi)) throw InputError(where + ".id: query ids must be 0..m-1 in document order");
      const auto& jqt = required(jq, "tables", where);
      if (!jqt.is_array() || jqt.empty()) throw InputError(where + ".tables: expected a non-empty array");
      for (std::size_t k = 0; k < jqt.size(); ++k) {
        const std::string twhere = where + ".tables[" + std::to_string(k) + "]";
        reject_unknown_fields(jqt[k], {"name", "selectivity"}, twhere);
        const auto name = string_field(jqt[k], "name", twhere);
        int ti = -1;
        for (std::size_t i = 0; i < tables.size(); ++i)
          if (tables[i].name == name) ti = static_cast<int>(i);
        if (ti < 0) throw InputError(twhere + ".name: unknown table '" + name + "'");
        if (q.scans(ti)) throw InputError(twhere + ".name: table '" + name + "' listed twice");
        double sel = number_field(required(jqt[k], "selectivity", twhere), twhere + ".selectivity");
        if (!(sel >= 0.0 && sel <= 1.0)) throw InputError(twhere + ".selectivity: must lie in [0,1]");
        q.tables.push_back({ti, sel});
      }
      std::sort(q.tables.begin(), q.tables.end(), [](const auto& a, const auto& b) { return a.table < b.table; });
      if (auto je = jq.find("edges"); je != jq.end()) {
        if (!je->is_array()) throw InputError(where + ".edges: expected an array");
        for (const auto& jid : *je) {
          if (!jid.is_number_integer()) throw InputError(where + ".edges: expected predicate indexes");
          const auto id = jid.get<std::int64_t>();
          if (id < 0 || id >= static_cast<std::int64_t>(edges.size()))
            throw InputError(where + ".edges: no join predicate " + std::to_string(id));
          const auto& e = edges[static_cast<std::size_t>(id)];
          if (!q.scans(e.left_table) || !q.scans(e.right_table))
            throw InputError(where + ".edges: predicate " + std::to_string(id) + " joins a table the query does not scan");
          if (std::find(q.edges.begin(), q.edges.end(), static_cast<int>(id)) != q.edges.end())
            throw InputError(where + ".edges: predicate " + std::to_string(id) + " listed twice");
          q.edges.push_back(static_cast<int>(id));
        }
      }
      // The join graph must connect every scanned table.
      std::vector<int> comp(tables.size());
      std::iota(comp.begin(), comp.end(), 0);
      auto find = [&](int x) {
        while (comp[static_cast<std::size_t>(x)] != x) x = comp[static_cast<std::size_t>(x)];
        return x;
      };
      for (int id : q.edges) {
        const auto& e = edges[static_cast<std::size_t>(id)];
        comp[static_cast<std::size_t>(find(e.left_table))] = find(e.right_table);
      }
      for (const auto& st : q.tables)
        if (find(st.table) != find(q.tables.front().table))
          throw InputError(where + ": join graph does not connect all scanned tables");
      q.weight = 1.0;
      if (auto jw = jq.find("weight"); jw != jq.end()) q.weight = number_field(*jw, where + ".weight");
      if (!(q.weight > 0.0)) throw InputError(where + ".weight: must be positive");
      queries.push_back(std::move(q));
    }
  }

  return Schema(std::move(tables), std::move(edges), std::move(queries));
}

Schema load_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open schema document '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("schema document '" + path + "' is not valid JSON: " + e.what());
  }
  return load_schema(doc);
}

json schema_to_json(const Schema& schema) {
  json doc;
  doc["tables"] = json::array();
  for (const auto& t : schema.tables()) {
    json jt{{"name", t.name}, {"row_count", t.row_count}, {"row_width", t.row_width}};
    jt["attributes"] = json::array();
    for (const auto& a : t.attributes) jt["attributes"].push_back({{"name", a.name}, {"distinct_values", a.distinct_values}});
    jt["primary_key"] = t.attributes[static_cast<std::size_t>(t.primary_key)].name;
    if (!t.composite_keys.empty()) {
      jt["composite_keys"] = json::array();
      for (const auto& ck : t.composite_keys) {
        json members = json::array();
        for (int a : ck) members.push_back(t.attributes[static_cast<std::size_t>(a)].name);
        jt["composite_keys"].push_back(members);
      }
    }
    if (t.fact) jt["fact"] = true;
    doc["tables"].push_back(std::move(jt));
  }
  doc["join_predicates"] = json::array();
  for (const auto& e : schema.edges()) {
    const auto& l = schema.table(e.left_table);
    const auto& r = schema.table(e.right_table);
    doc["join_predicates"].push_back({{"left", l.name + "." + l.attributes[static_cast<std::size_t>(e.left_attr)].name},
                                      {"right", r.name + "." + r.attributes[static_cast<std::size_t>(e.right_attr)].name}});
  }
  doc["queries"] = json::array();
  for (const auto& q : schema.queries()) {
    json jq{{"id", q.id}, {"edges", q.edges}, {"weight", q.weight}};
    jq["tables"] = json::array();
    for (const auto& st : q.tables) jq["tables"].push_back({{"name", schema.table(st.table).name}, {"selectivity", st.selectivity}});
    doc["queries"].push_back(std::move(jq));
  }
  return doc;
}

PartitioningState reference_partitioning(const Schema& schema) {
  PartitioningState p;
  for (const auto& t : schema.tables()) p.designs.push_back(TableDesign::partitioned_by(t.primary_key));
  p.active_edges.assign(static_cast<std::size_t>(schema.edge_count()), false);
  return p;
}

std::vector<Violation> validate_state(const PartitioningState& p, const Schema& schema) {
  std::vector<Violation> out;
  if (p.designs.size() != schema.tables().size() || p.active_edges.size() != schema.edges().size()) {
    out.push_back({Violation::Kind::kShape, "state shape does not match the schema"});
    return out;
  }
  for (int t = 0; t < schema.table_count(); ++t) {
    const auto d = p.designs[static_cast<std::size_t>(t)];
    if (d.slot() < 0 || d.slot() > schema.table(t).key_count())
      out.push_back({Violation::Kind::kInvalidKey, "table '" + schema.table(t).name + "' has no key slot " + std::to_string(d.slot())});
  }
  if (!out.empty()) return out;

  for (const auto& e : schema.edges()) {
    if (!p.is_active(e.id)) continue;
    for (int t : {e.left_table, e.right_table}) {
      const auto d = p.designs[static_cast<std::size_t>(t)];
      const auto& name = schema.table(t).name;
      if (d.is_replicated()) {
        out.push_back({Violation::Kind::kReplicatedEndpoint,
                       "edge " + std::to_string(e.id) + " is active but '" + name + "' is replicated"});
      } else if (d.partition_key() != e.attr_for(t)) {
        out.push_back({Violation::Kind::kDesignMismatch,
                       "edge " + std::to_string(e.id) + " is active but '" + name + "' is partitioned by " +
                           schema.table(t).key_name(d.partition_key())});
      }
    }
  }
  for (const auto& a : schema.edges()) {
    if (!p.is_active(a.id)) continue;
    for (const auto& b : schema.edges()) {
      if (b.id <= a.id || !p.is_active(b.id)) continue;
      for (int t : {a.left_table, a.right_table}) {
        if (b.touches(t) && a.attr_for(t) != b.attr_for(t)) {
          out.push_back({Violation::Kind::kEdgeConflict, "edges " + std::to_string(a.id) + " and " + std::to_string(b.id) +
                                                             " require '" + schema.table(t).name + "' on different attributes"});
        }
      }
    }
  }
  return out;
}

PartitioningState with_implied_edges(PartitioningState p, const Schema& schema) {
  for (const auto& e : schema.edges()) {
    const auto l = p.designs[static_cast<std::size_t>(e.left_table)];
    const auto r = p.designs[static_cast<std::size_t>(e.right_table)];
    p.active_edges[static_cast<std::size_t>(e.id)] = !l.is_replicated() && !r.is_replicated() &&
                                                      l.partition_key() == e.left_attr && r.partition_key() == e.right_attr;
  }
  return p;
}

std::vector<PartitioningState> enumerate_design_states(const Schema& schema, std::size_t limit) {
  std::size_t total = 1;
  for (const auto& t : schema.tables()) {
    total *= static_cast<std::size_t>(t.key_count() + 1);
    if (total > limit) throw std::invalid_argument("design space exceeds enumeration limit of " + std::to_string(limit));
  }
  std::vector<PartitioningState> out;
  out.reserve(total);
  PartitioningState p = reference_partitioning(schema);
  std::vector<int> slots(static_cast<std::size_t>(schema.table_count()), 0);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t t = 0; t < slots.size(); ++t) p.designs[t] = TableDesign::from_slot(slots[t]);
    out.push_back(with_implied_edges(p, schema));
    // Odometer with the last table varying fastest gives lexicographic order.
    for (std::size_t t = slots.size(); t-- > 0;) {
      if (++slots[t] <= schema.tables()[t].key_count()) break;
      slots[t] = 0;
    }
  }
  return out;
}

std::string describe_design(const Schema& schema, int table, TableDesign design) {
  const auto& t = schema.table(table);
  if (design.is_replicated()) return t.name + ": replicated";
  return t.name + ": partitioned by " + t.key_name(design.partition_key());
}

}  // namespace partadvisor
