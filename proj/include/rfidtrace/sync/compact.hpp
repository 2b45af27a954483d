#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rfidtrace/store/table_set.hpp"
#include "rfidtrace/sync/error.hpp"

namespace rfidtrace::sync {

// Compact table image "CTB1" (little-endian):
//
//   magic "CTB1"
//   u8 name length, name
//   u8 column count, then per column:
//       u8 name length, name, u8 type (0 INTEGER, 1 REAL, 2 TEXT, 3 BLOB),
//       u8 flags (bit0 nullable)
//   u8 key column count, then that many u8 column indices in key order
//   u64 revision, u64 modified_at
//   u32 row count, rows in key order, each cell:
//       u8 tag: 0 NULL, 1 INTEGER i64, 2 REAL f32, 3 TEXT u8 len + bytes,
//               4 BLOB u16 len + bytes; bit 7 set on a REAL narrowed inexactly
//   u16 CRC-16/CCITT-FALSE over everything before it
//
// Limits: TEXT at most 255 bytes, BLOB at most 65535 bytes, REAL must be
// finite in binary32 when finite in binary64. Reals that are not exactly
// representable are narrowed and flagged, not rejected.

inline constexpr std::size_t kMaxCompactText = 255;
inline constexpr std::size_t kMaxCompactBlob = 65535;

using Digest = std::array<std::uint8_t, 32>;

struct NarrowedField {
  store::Key key;
  std::string column;
  double original = 0;
  double stored = 0;
};

struct CompactImage {
  Bytes bytes;
  std::vector<NarrowedField> narrowed;
};

/// Throws ConversionError listing every field over the limits.
CompactImage to_compact(const store::Table& table);
/// Widens reals back to binary64. Throws Protocol on a malformed image.
store::Table from_compact(ByteView image);
/// The table as the compact side would hold it.
store::Table narrow(const store::Table& table);

/// BLAKE2b-256 over the narrowed rows only (no revision, stamp or flags).
/// Equal digests mean content-identical under conversion.
Digest content_digest(const store::Table& table);
bool same_under_conversion(const store::Table& a, const store::Table& b);

/// Whole-set conversion; one ConversionError collects the issues of all tables.
std::map<std::string, CompactImage> to_compact(const store::TableSet& set);
store::TableSet from_compact(const std::map<std::string, Bytes>& images);

}  // namespace rfidtrace::sync
