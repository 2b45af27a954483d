#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfidtrace/store/schema.hpp"

namespace rfidtrace::store {

struct Table {
  TableSchema schema;
  std::map<Key, Row, KeyLess> rows;
  std::uint64_t revision = 0;
  /// Stamp of the last mutation (microseconds; 0 = never modified).
  std::uint64_t modified_at = 0;

  const Row* find(const Key& key) const;
  std::vector<Row> all_rows() const;
  /// Same schema, rows, revision and stamp.
  bool same_as(const Table& other) const;
  /// Same rows only.
  bool same_content(const Table& other) const;
};

enum class ChangeOp { Upsert, Delete, Replace };

std::string_view to_string(ChangeOp op);

/// One journaled mutation. `revision` is the table revision after the change.
struct Change {
  std::uint64_t revision = 0;
  std::string table;
  ChangeOp op = ChangeOp::Upsert;
  Key key;                // Upsert, Delete
  Row row;                // Upsert
  std::vector<Row> rows;  // Replace
  std::uint64_t at = 0;
};

/// Journal record: one JSON object per line,
///   {"rev":R,"table":T,"op":"upsert","key":[...],"row":[...],"at":A}
///   {"rev":R,"table":T,"op":"delete","key":[...],"at":A}
///   {"rev":R,"table":T,"op":"replace","rows":[[...],...],"at":A}
nlohmann::json change_to_json(const Change& change);
Change change_from_json(const nlohmann::json& j, const TableSchema& schema);

class TableSet {
 public:
  /// Empty tables for every built-in schema.
  static TableSet central();

  void add_table(TableSchema schema);
  bool has(std::string_view name) const { return tables_.contains(std::string(name)); }
  /// Throws UnknownTable.
  const Table& table(std::string_view name) const;
  Table& table(std::string_view name);
  std::vector<std::string> names() const;

  /// Applies a change exactly as recorded (revision and stamp are taken from
  /// the change). Throws Corrupt if the revision does not follow on.
  void apply(const Change& change);

  /// Canonical serialization: tables by name, rows by key, cells via
  /// value_to_json. Two sets serialize identically iff they are equal.
  nlohmann::json to_json() const;
  std::string canonical() const { return to_json().dump(); }
  static TableSet from_json(const nlohmann::json& j);

 private:
  std::map<std::string, Table, std::less<>> tables_;
};

}  // namespace rfidtrace::store
