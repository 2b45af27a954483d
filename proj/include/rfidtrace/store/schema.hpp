#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfidtrace/store/value.hpp"

namespace rfidtrace::store {

struct Column {
  std::string name;
  ColumnType type = ColumnType::Text;
  bool nullable = false;
  friend bool operator==(const Column&, const Column&) = default;
};

struct TableSchema {
  std::string name;
  std::vector<Column> columns;
  /// Indices into `columns` forming the primary key, in key order.
  std::vector<std::size_t> key;

  std::optional<std::size_t> find(std::string_view column) const;
  /// Throws UnknownColumn.
  std::size_t index_of(std::string_view column) const;
  Key key_of(const Row& row) const;

  /// Checks arity, types and nullability. Throws TypeMismatch.
  void check_row(const Row& row) const;
  void check_key(const Key& key) const;

  /// Builds a row from a JSON object keyed by column name. Missing nullable
  /// columns become NULL; unknown names throw UnknownColumn.
  Row row_from_object(const nlohmann::json& obj) const;
  nlohmann::json row_to_object(const Row& row) const;
  /// Key from a JSON object (key columns only) or array.
  Key key_from_json(const nlohmann::json& j) const;

  nlohmann::json to_json() const;
  static TableSchema from_json(const nlohmann::json& j);

  friend bool operator==(const TableSchema&, const TableSchema&) = default;
};

namespace tables {
inline constexpr const char* kTransponders = "transponders";
inline constexpr const char* kStations = "stations";
inline constexpr const char* kEvents = "events";
inline constexpr const char* kUsers = "users";
inline constexpr const char* kTemplates = "templates";
inline constexpr const char* kReportPatterns = "report_patterns";
inline constexpr const char* kAlarmRules = "alarm_rules";
}  // namespace tables

/// The central tables, in a fixed order.
const std::vector<TableSchema>& builtin_schemas();
const TableSchema& builtin_schema(std::string_view table);

}  // namespace rfidtrace::store
