#include "rfidtrace/sync/compact.hpp"

#include <sodium.h>

#include <cmath>
#include <cstring>

#include "rfidtrace/common/crc16.hpp"

namespace rfidtrace::sync {

using store::ColumnType;
using store::Key;
using store::Row;
using store::Table;
using store::TableSchema;
using store::Value;

namespace {

constexpr std::uint8_t kTagNull = 0;
constexpr std::uint8_t kTagInteger = 1;
constexpr std::uint8_t kTagReal = 2;
constexpr std::uint8_t kTagText = 3;
constexpr std::uint8_t kTagBlob = 4;
constexpr std::uint8_t kInexact = 0x80;

std::uint8_t type_code(ColumnType t) {
  switch (t) {
    case ColumnType::Integer: return 0;
    case ColumnType::Real: return 1;
    case ColumnType::Text: return 2;
    case ColumnType::Blob: return 3;
  }
  return 0;
}

void put_str8(Bytes& out, const std::string& s) {
  if (s.size() > 255) throw Error(Errc::Protocol, "name longer than 255 bytes: " + s.substr(0, 32));
  out.push_back(static_cast<std::uint8_t>(s.size()));
  append(out, as_bytes(s));
}

class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw Error(Errc::Protocol, "compact image truncated");
  }
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  template <typename T>
  T le() {
    need(sizeof(T));
    auto v = get_le<T>(in_, pos_);
    pos_ += sizeof(T);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  Bytes bytes(std::size_t n) {
    need(n);
    Bytes b(in_.begin() + static_cast<std::ptrdiff_t>(pos_), in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return b;
  }
  std::size_t pos() const { return pos_; }

 private:
  ByteView in_;
  std::size_t pos_ = 0;
};

struct RowEncoding {
  std::vector<NarrowedField> narrowed;
  std::vector<ConversionIssue> issues;
};

// Appends the encoded rows. With `mask_flags` the inexact bit is left out, so
// the bytes depend on the narrowed values alone.
RowEncoding encode_rows(const Table& table, Bytes& out, bool mask_flags) {
  RowEncoding enc;
  const auto& schema = table.schema;
  put_le(out, static_cast<std::uint32_t>(table.rows.size()));
  for (const auto& [key, row] : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto& v = row[c];
      auto issue = [&](std::string reason) {
        enc.issues.push_back({schema.name, key, schema.columns[c].name, std::move(reason)});
      };
      if (store::is_null(v)) {
        out.push_back(kTagNull);
      } else if (const auto* i = std::get_if<std::int64_t>(&v)) {
        out.push_back(kTagInteger);
        put_le(out, *i);
      } else if (const auto* d = std::get_if<double>(&v)) {
        const float f = static_cast<float>(*d);
        if (std::isfinite(*d) && !std::isfinite(f)) {
          issue("real " + store::display(v) + " outside binary32 range");
          continue;
        }
        const bool exact = store::same(Value(static_cast<double>(f)), v);
        if (!exact) enc.narrowed.push_back({key, schema.columns[c].name, *d, static_cast<double>(f)});
        out.push_back(static_cast<std::uint8_t>(kTagReal | (exact || mask_flags ? 0 : kInexact)));
        put_f32(out, f);
      } else if (const auto* s = std::get_if<std::string>(&v)) {
        if (s->size() > kMaxCompactText) {
          issue("text of " + std::to_string(s->size()) + " bytes exceeds " + std::to_string(kMaxCompactText));
          continue;
        }
        out.push_back(kTagText);
        out.push_back(static_cast<std::uint8_t>(s->size()));
        append(out, as_bytes(*s));
      } else {
        const auto& b = std::get<Bytes>(v);
        if (b.size() > kMaxCompactBlob) {
          issue("blob of " + std::to_string(b.size()) + " bytes exceeds " + std::to_string(kMaxCompactBlob));
          continue;
        }
        out.push_back(kTagBlob);
        put_le(out, static_cast<std::uint16_t>(b.size()));
        append(out, b);
      }
    }
  }
  return enc;
}

}  // namespace

CompactImage to_compact(const Table& table) {
  const auto& schema = table.schema;
  Bytes out{'C', 'T', 'B', '1'};
  put_str8(out, schema.name);
  if (schema.columns.size() > 255) throw Error(Errc::Protocol, "too many columns in " + schema.name);
  out.push_back(static_cast<std::uint8_t>(schema.columns.size()));
  for (const auto& col : schema.columns) {
    put_str8(out, col.name);
    out.push_back(type_code(col.type));
    out.push_back(col.nullable ? 1 : 0);
  }
  out.push_back(static_cast<std::uint8_t>(schema.key.size()));
  for (auto k : schema.key) out.push_back(static_cast<std::uint8_t>(k));
  put_le(out, table.revision);
  put_le(out, table.modified_at);
  auto enc = encode_rows(table, out, false);
  if (!enc.issues.empty()) throw ConversionError(std::move(enc.issues));
  put_le(out, crc16_ccitt_false(out));
  return {std::move(out), std::move(enc.narrowed)};
}

Table from_compact(ByteView image) {
  if (image.size() < 6 || image[0] != 'C' || image[1] != 'T' || image[2] != 'B' || image[3] != '1') {
    throw Error(Errc::Protocol, "not a compact table image");
  }
  const auto body = image.first(image.size() - 2);
  if (crc16_ccitt_false(body) != get_le<std::uint16_t>(image, image.size() - 2)) {
    throw Error(Errc::Protocol, "compact table image CRC mismatch");
  }
  Reader r(body);
  r.str(4);
  Table t;
  t.schema.name = r.str(r.u8());
  const auto ncols = r.u8();
  for (std::size_t i = 0; i < ncols; ++i) {
    store::Column col;
    col.name = r.str(r.u8());
    const auto type = r.u8();
    if (type > 3) throw Error(Errc::Protocol, "bad column type in compact image");
    col.type = static_cast<ColumnType>(type);
    col.nullable = (r.u8() & 1) != 0;
    t.schema.columns.push_back(std::move(col));
  }
  const auto nkey = r.u8();
  for (std::size_t i = 0; i < nkey; ++i) {
    const auto k = r.u8();
    if (k >= ncols) throw Error(Errc::Protocol, "bad key column in compact image");
    t.schema.key.push_back(k);
  }
  if (t.schema.key.empty()) throw Error(Errc::Protocol, "compact image without key");
  t.revision = r.le<std::uint64_t>();
  t.modified_at = r.le<std::uint64_t>();
  const auto nrows = r.le<std::uint32_t>();
  for (std::uint32_t i = 0; i < nrows; ++i) {
    Row row;
    row.reserve(ncols);
    for (std::size_t c = 0; c < ncols; ++c) {
      const auto tag = static_cast<std::uint8_t>(r.u8() & ~kInexact);
      switch (tag) {
        case kTagNull: row.emplace_back(); break;
        case kTagInteger: row.emplace_back(r.le<std::int64_t>()); break;
        case kTagReal: {
          const auto bits = r.le<std::uint32_t>();
          float f;
          std::memcpy(&f, &bits, sizeof f);
          row.emplace_back(static_cast<double>(f));
          break;
        }
        case kTagText: row.emplace_back(r.str(r.u8())); break;
        case kTagBlob: row.emplace_back(r.bytes(r.le<std::uint16_t>())); break;
        default: throw Error(Errc::Protocol, "bad cell tag in compact image");
      }
    }
    try {
      t.schema.check_row(row);
    } catch (const store::Error& e) {
      throw Error(Errc::Protocol, std::string("compact row does not fit its schema: ") + e.what());
    }
    auto key = t.schema.key_of(row);
    if (!t.rows.emplace(std::move(key), std::move(row)).second) {
      throw Error(Errc::Protocol, "duplicate key in compact image");
    }
  }
  if (r.pos() != body.size()) throw Error(Errc::Protocol, "trailing bytes in compact image");
  return t;
}

Table narrow(const Table& table) { return from_compact(to_compact(table).bytes); }

Digest content_digest(const Table& table) {
  Bytes rows;
  auto enc = encode_rows(table, rows, true);
  if (!enc.issues.empty()) throw ConversionError(std::move(enc.issues));
  Digest d{};
  crypto_generichash(d.data(), d.size(), rows.data(), rows.size(), nullptr, 0);
  return d;
}

bool same_under_conversion(const Table& a, const Table& b) { return content_digest(a) == content_digest(b); }

std::map<std::string, CompactImage> to_compact(const store::TableSet& set) {
  std::map<std::string, CompactImage> out;
  std::vector<ConversionIssue> issues;
  for (const auto& name : set.names()) {
    try {
      out.emplace(name, to_compact(set.table(name)));
    } catch (const ConversionError& e) {
      issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    }
  }
  if (!issues.empty()) throw ConversionError(std::move(issues));
  return out;
}

store::TableSet from_compact(const std::map<std::string, Bytes>& images) {
  store::TableSet set;
  for (const auto& [name, bytes] : images) {
    auto t = from_compact(bytes);
    if (t.schema.name != name) throw Error(Errc::Protocol, "image for " + name + " holds " + t.schema.name);
    set.add_table(t.schema);
    set.table(name) = std::move(t);
  }
  return set;
}

}  // namespace rfidtrace::sync
