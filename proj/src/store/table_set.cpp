#include "rfidtrace/store/table_set.hpp"

namespace rfidtrace::store {

using nlohmann::json;

const Row* Table::find(const Key& key) const {
  auto it = rows.find(key);
  return it == rows.end() ? nullptr : &it->second;
}

std::vector<Row> Table::all_rows() const {
  std::vector<Row> out;
  out.reserve(rows.size());
  for (const auto& [_, r] : rows) out.push_back(r);
  return out;
}

bool Table::same_content(const Table& other) const {
  if (rows.size() != other.rows.size()) return false;
  auto a = rows.begin();
  auto b = other.rows.begin();
  for (; a != rows.end(); ++a, ++b) {
    if (!same(a->second, b->second)) return false;
  }
  return true;
}

bool Table::same_as(const Table& other) const {
  return schema == other.schema && revision == other.revision && modified_at == other.modified_at &&
         same_content(other);
}

std::string_view to_string(ChangeOp op) {
  switch (op) {
    case ChangeOp::Upsert: return "upsert";
    case ChangeOp::Delete: return "delete";
    case ChangeOp::Replace: return "replace";
  }
  return "?";
}

namespace {

json row_json(const Row& row) {
  json a = json::array();
  for (const auto& v : row) a.push_back(value_to_json(v));
  return a;
}

Row row_from(const json& a, const TableSchema& schema) {
  if (!a.is_array() || a.size() != schema.columns.size()) {
    throw Error(Errc::Corrupt, schema.name + ": bad row arity");
  }
  Row row;
  row.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) row.push_back(value_from_json(a[i], schema.columns[i].type));
  schema.check_row(row);
  return row;
}

}  // namespace

json change_to_json(const Change& c) {
  json j{{"rev", c.revision}, {"table", c.table}, {"op", to_string(c.op)}};
  switch (c.op) {
    case ChangeOp::Upsert:
      j["key"] = row_json(c.key);
      j["row"] = row_json(c.row);
      break;
    case ChangeOp::Delete:
      j["key"] = row_json(c.key);
      break;
    case ChangeOp::Replace: {
      json rows = json::array();
      for (const auto& r : c.rows) rows.push_back(row_json(r));
      j["rows"] = rows;
      break;
    }
  }
  j["at"] = c.at;
  return j;
}

Change change_from_json(const json& j, const TableSchema& schema) {
  try {
    Change c;
    c.revision = j.at("rev").get<std::uint64_t>();
    c.table = j.at("table").get<std::string>();
    c.at = j.at("at").get<std::uint64_t>();
    const auto op = j.at("op").get<std::string>();
    if (op == "upsert") {
      c.op = ChangeOp::Upsert;
      c.row = row_from(j.at("row"), schema);
      c.key = schema.key_of(c.row);
    } else if (op == "delete") {
      c.op = ChangeOp::Delete;
      c.key = schema.key_from_json(j.at("key"));
    } else if (op == "replace") {
      c.op = ChangeOp::Replace;
      for (const auto& r : j.at("rows")) c.rows.push_back(row_from(r, schema));
    } else {
      throw Error(Errc::Corrupt, "unknown journal op '" + op + "'");
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(Errc::Corrupt, std::string("bad journal record: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::Corrupt) throw;
    throw Error(Errc::Corrupt, std::string("bad journal record: ") + e.what());
  }
}

TableSet TableSet::central() {
  TableSet set;
  for (const auto& s : builtin_schemas()) set.add_table(s);
  return set;
}

void TableSet::add_table(TableSchema schema) {
  auto name = schema.name;
  tables_[name] = Table{std::move(schema), {}, 0, 0};
}

const Table& TableSet::table(std::string_view name) const {
  auto it = tables_.find(name);
  if (it == tables_.end()) throw Error(Errc::UnknownTable, std::string(name));
  return it->second;
}

Table& TableSet::table(std::string_view name) {
  auto it = tables_.find(name);
  if (it == tables_.end()) throw Error(Errc::UnknownTable, std::string(name));
  return it->second;
}

std::vector<std::string> TableSet::names() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : tables_) out.push_back(n);
  return out;
}

void TableSet::apply(const Change& c) {
  auto& t = table(c.table);
  if (c.revision != t.revision + 1) {
    throw Error(Errc::Corrupt, c.table + ": revision " + std::to_string(c.revision) + " after " +
                                   std::to_string(t.revision));
  }
  switch (c.op) {
    case ChangeOp::Upsert:
      t.schema.check_row(c.row);
      t.rows[t.schema.key_of(c.row)] = c.row;
      break;
    case ChangeOp::Delete:
      if (t.rows.erase(c.key) == 0) throw Error(Errc::NotFound, c.table);
      break;
    case ChangeOp::Replace: {
      std::map<Key, Row, KeyLess> rows;
      for (const auto& r : c.rows) {
        t.schema.check_row(r);
        if (!rows.emplace(t.schema.key_of(r), r).second) {
          throw Error(Errc::DuplicateKey, c.table + ": duplicate key in replacement");
        }
      }
      t.rows = std::move(rows);
      break;
    }
  }
  t.revision = c.revision;
  t.modified_at = c.at;
}

json TableSet::to_json() const {
  json tables = json::array();
  for (const auto& [name, t] : tables_) {
    json rows = json::array();
    for (const auto& [_, r] : t.rows) rows.push_back(row_json(r));
    tables.push_back({{"schema", t.schema.to_json()},
                      {"revision", t.revision},
                      {"modified_at", t.modified_at},
                      {"rows", rows}});
  }
  return {{"format", "rfidtrace-central"}, {"version", 1}, {"tables", tables}};
}

TableSet TableSet::from_json(const json& j) {
  try {
    if (j.at("format") != "rfidtrace-central") throw Error(Errc::Corrupt, "not a central store snapshot");
    if (j.at("version") != 1) throw Error(Errc::UnsupportedVersion, j.at("version").dump());
    TableSet set;
    for (const auto& t : j.at("tables")) {
      auto schema = TableSchema::from_json(t.at("schema"));
      Table table{schema, {}, t.at("revision").get<std::uint64_t>(), t.at("modified_at").get<std::uint64_t>()};
      for (const auto& r : t.at("rows")) {
        auto row = row_from(r, schema);
        if (!table.rows.emplace(schema.key_of(row), std::move(row)).second) {
          throw Error(Errc::Corrupt, schema.name + ": duplicate key");
        }
      }
      set.tables_[schema.name] = std::move(table);
    }
    return set;
  } catch (const json::exception& e) {
    throw Error(Errc::Corrupt, std::string("bad snapshot: ") + e.what());
  }
}

}  // namespace rfidtrace::store
