#include "rfidtrace/store/schema.hpp"

#include <algorithm>

namespace rfidtrace::store {

using nlohmann::json;

std::optional<std::size_t> TableSchema::find(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == column) return i;
  }
  return std::nullopt;
}

std::size_t TableSchema::index_of(std::string_view column) const {
  if (auto i = find(column)) return *i;
  throw Error(Errc::UnknownColumn, name + "." + std::string(column));
}

Key TableSchema::key_of(const Row& row) const {
  Key k;
  k.reserve(key.size());
  for (auto i : key) k.push_back(row.at(i));
  return k;
}

namespace {

bool fits(const Value& v, const Column& c) {
  switch (v.index()) {
    case 0: return c.nullable;
    case 1: return c.type == ColumnType::Integer;
    case 2: return c.type == ColumnType::Real;
    case 3: return c.type == ColumnType::Text;
    default: return c.type == ColumnType::Blob;
  }
}

std::string describe(const Value& v) {
  static const char* names[] = {"NULL", "INTEGER", "REAL", "TEXT", "BLOB"};
  return names[v.index()];
}

}  // namespace

void TableSchema::check_row(const Row& row) const {
  if (row.size() != columns.size()) {
    throw Error(Errc::TypeMismatch, name + ": expected " + std::to_string(columns.size()) +
                                        " columns, got " + std::to_string(row.size()));
  }
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!fits(row[i], columns[i])) {
      throw Error(Errc::TypeMismatch, name + "." + columns[i].name + ": " + describe(row[i]) +
                                          " does not fit " + std::string(to_string(columns[i].type)));
    }
  }
  for (auto i : key) {
    if (is_null(row[i])) throw Error(Errc::TypeMismatch, name + "." + columns[i].name + ": key is NULL");
  }
}

void TableSchema::check_key(const Key& k) const {
  if (k.size() != key.size()) {
    throw Error(Errc::TypeMismatch, name + ": key needs " + std::to_string(key.size()) + " values");
  }
  for (std::size_t i = 0; i < k.size(); ++i) {
    const auto& c = columns[key[i]];
    if (is_null(k[i]) || !fits(k[i], c)) {
      throw Error(Errc::TypeMismatch, name + "." + c.name + ": bad key value");
    }
  }
}

Row TableSchema::row_from_object(const json& obj) const {
  if (!obj.is_object()) throw Error(Errc::TypeMismatch, name + ": row must be an object");
  for (const auto& [k, _] : obj.items()) index_of(k);
  Row row;
  row.reserve(columns.size());
  for (const auto& c : columns) {
    auto it = obj.find(c.name);
    if (it == obj.end()) {
      row.emplace_back(std::monostate{});
    } else {
      try {
        row.push_back(value_from_json(*it, c.type));
      } catch (const Error& e) {
        throw Error(Errc::TypeMismatch, name + "." + c.name + ": " + e.detail());
      }
    }
  }
  check_row(row);
  return row;
}

json TableSchema::row_to_object(const Row& row) const {
  json obj = json::object();
  for (std::size_t i = 0; i < columns.size() && i < row.size(); ++i) {
    obj[columns[i].name] = value_to_json(row[i]);
  }
  return obj;
}

Key TableSchema::key_from_json(const json& j) const {
  Key k;
  if (j.is_array()) {
    if (j.size() != key.size()) throw Error(Errc::TypeMismatch, name + ": wrong key arity");
    for (std::size_t i = 0; i < key.size(); ++i) k.push_back(value_from_json(j[i], columns[key[i]].type));
  } else if (j.is_object()) {
    for (auto i : key) {
      if (!j.contains(columns[i].name)) {
        throw Error(Errc::TypeMismatch, name + ": key column '" + columns[i].name + "' missing");
      }
      k.push_back(value_from_json(j[columns[i].name], columns[i].type));
    }
  } else if (key.size() == 1) {
    k.push_back(value_from_json(j, columns[key[0]].type));
  } else {
    throw Error(Errc::TypeMismatch, name + ": bad key");
  }
  check_key(k);
  return k;
}

json TableSchema::to_json() const {
  json cols = json::array();
  for (const auto& c : columns) {
    cols.push_back({{"name", c.name}, {"type", to_string(c.type)}, {"nullable", c.nullable}});
  }
  json keys = json::array();
  for (auto i : key) keys.push_back(columns[i].name);
  return {{"name", name}, {"columns", cols}, {"key", keys}};
}

TableSchema TableSchema::from_json(const json& j) {
  try {
    TableSchema s;
    s.name = j.at("name").get<std::string>();
    for (const auto& c : j.at("columns")) {
      s.columns.push_back(Column{c.at("name").get<std::string>(),
                                 parse_column_type(c.at("type").get<std::string>()),
                                 c.value("nullable", false)});
    }
    for (const auto& k : j.at("key")) s.key.push_back(s.index_of(k.get<std::string>()));
    if (s.key.empty()) throw Error(Errc::Corrupt, s.name + ": table without a key");
    return s;
  } catch (const json::exception& e) {
    throw Error(Errc::Corrupt, std::string("bad schema: ") + e.what());
  }
}

namespace {

TableSchema make(std::string name, std::vector<Column> columns, std::vector<std::string> key) {
  TableSchema s{std::move(name), std::move(columns), {}};
  for (const auto& k : key) s.key.push_back(s.index_of(k));
  return s;
}

constexpr auto I = ColumnType::Integer;
constexpr auto T = ColumnType::Text;
constexpr auto B = ColumnType::Blob;

}  // namespace

const std::vector<TableSchema>& builtin_schemas() {
  static const std::vector<TableSchema> all{
      make(tables::kTransponders,
           {{"uid", T}, {"template_id", I, true}, {"version", I, true}, {"last_payload", B, true},
            {"last_station", I, true}, {"last_seen", I, true}},
           {"uid"}),
      make(tables::kStations, {{"addr", I}, {"name", T}, {"baud_class", I}, {"status", T}}, {"addr"}),
      make(tables::kEvents,
           {{"station", I}, {"seq", I}, {"kind", T}, {"uid", T, true}, {"sim_timestamp", I},
            {"ingest_time", I}, {"detail", T, true}},
           {"station", "seq"}),
      make(tables::kUsers, {{"username", T}, {"role", T}, {"password_hash", T}, {"enabled", I}},
           {"username"}),
      make(tables::kTemplates, {{"template_id", I}, {"version", I}, {"name", T}, {"document", T}},
           {"template_id", "version"}),
      make(tables::kReportPatterns,
           {{"name", T}, {"source", T}, {"filter", T}, {"columns", T}, {"sort", T}, {"format", T}},
           {"name"}),
      make(tables::kAlarmRules, {{"name", T}, {"trigger", T}, {"params", T}}, {"name"}),
  };
  return all;
}

const TableSchema& builtin_schema(std::string_view table) {
  for (const auto& s : builtin_schemas()) {
    if (s.name == table) return s;
  }
  throw Error(Errc::UnknownTable, std::string(table));
}

}  // namespace rfidtrace::store
