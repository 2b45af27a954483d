#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rfidtrace/common/bytes.hpp"
#include "rfidtrace/common/error.hpp"

namespace rfidtrace::store {

enum class Errc {
  Unauthorized,
  DuplicateKey,
  NotFound,
  UnknownTable,
  UnknownColumn,
  TypeMismatch,
  BadCredentials,
  Disabled,
  WrongPassphrase,
  IntegrityFailure,
  UnsupportedVersion,
  BadFilter,
  BadPattern,
  BadRule,
  Corrupt,
  Io,
};

std::string_view to_string(Errc code);
using Error = BasicError<Errc>;

enum class ColumnType { Integer, Real, Text, Blob };

std::string_view to_string(ColumnType type);
ColumnType parse_column_type(std::string_view name);

/// A cell. std::monostate is NULL.
using Value = std::variant<std::monostate, std::int64_t, double, std::string, Bytes>;
using Row = std::vector<Value>;
using Key = std::vector<Value>;

inline bool is_null(const Value& v) noexcept { return std::holds_alternative<std::monostate>(v); }

/// Exact equality; reals compare by bit pattern so NaN == NaN and 0.0 != -0.0.
bool same(const Value& a, const Value& b) noexcept;
bool same(const Row& a, const Row& b) noexcept;

/// Total order used for sorting and keys: NULL first, then numbers (integers
/// and reals compared numerically, NaN last among numbers), then text
/// (bytewise), then blobs.
int compare(const Value& a, const Value& b) noexcept;

struct KeyLess {
  bool operator()(const Key& a, const Key& b) const noexcept;
};

// Canonical JSON cell encoding, driven by the column type:
//   NULL    -> null
//   INTEGER -> number
//   REAL    -> number, or "nan" / "inf" / "-inf"
//   TEXT    -> string
//   BLOB    -> uppercase hex string
nlohmann::json value_to_json(const Value& v);
/// Throws TypeMismatch when `j` does not fit `type`. Integers are accepted for
/// REAL columns.
Value value_from_json(const nlohmann::json& j, ColumnType type);

/// Plain text rendering for reports and tables: NULL is empty, reals use the
/// shortest round-trip form, blobs are hex.
std::string display(const Value& v);

}  // namespace rfidtrace::store
