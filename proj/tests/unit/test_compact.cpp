#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "rfidtrace/sync/compact.hpp"
#include "rfidtrace/common/hex.hpp"
#include "rfidtrace/sync/wire.hpp"
#include "support/store_gen.hpp"

using namespace rfidtrace;
using namespace rfidtrace::sync;
using store::ColumnType;
using store::Row;
using store::Table;
using store::TableSchema;
using store::Value;

namespace {

TableSchema readings_schema() {
  TableSchema s;
  s.name = "readings";
  s.columns = {{"id", ColumnType::Integer, false},
               {"label", ColumnType::Text, true},
               {"level", ColumnType::Real, true},
               {"raw", ColumnType::Blob, true}};
  s.key = {0};
  return s;
}

void put(Table& t, Row row) {
  auto key = t.schema.key_of(row);
  t.rows.insert_or_assign(std::move(key), std::move(row));
}

// A binary64 value is exactly representable in binary32 when its significand
// fits the bits binary32 has at that exponent. Decided with frexp/ldexp only.
bool fits_binary32(double x) {
  if (std::isnan(x) || std::isinf(x) || x == 0) return true;
  int e = 0;
  const double m = std::frexp(x, &e);  // x = m * 2^e, 0.5 <= |m| < 1
  if (e > 128) return false;
  if (e < -148) return false;
  const int bits = e >= -125 ? 24 : 24 - (-125 - e);
  const double scaled = std::ldexp(m, bits);
  return scaled == std::floor(scaled);
}

Table random_table(std::mt19937_64& rng, bool within_limits) {
  Table t;
  t.schema = readings_schema();
  t.revision = rng() % 100;
  t.modified_at = rng();
  const int n = static_cast<int>(rng() % 30);
  for (int i = 0; i < n; ++i) {
    Row row{static_cast<std::int64_t>(rng() % 1000) - 500, std::monostate{}, std::monostate{}, std::monostate{}};
    if (rng() % 4) row[1] = gen::random_text(rng, 20);
    if (rng() % 4) {
      // Floats widened are always exact; half of the time use arbitrary doubles.
      const float f = std::uniform_real_distribution<float>(-1e6f, 1e6f)(rng);
      row[2] = within_limits || rng() % 2 ? static_cast<double>(f)
                                          : std::uniform_real_distribution<double>(-1e6, 1e6)(rng);
    }
    if (rng() % 4) {
      Bytes b(rng() % 40);
      for (auto& x : b) x = static_cast<std::uint8_t>(rng());
      row[3] = b;
    }
    put(t, std::move(row));
  }
  return t;
}

}  // namespace

TEST_CASE("within-limit tables survive conversion exactly") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto t = random_table(rng, true);
    const auto image = to_compact(t);
    CHECK(image.narrowed.empty());
    const auto back = from_compact(image.bytes);
    REQUIRE(back.same_as(t));
    CHECK(to_compact(back).bytes == image.bytes);
  }
}

TEST_CASE("short strings and small reals roundtrip") {
  Table t;
  t.schema = readings_schema();
  put(t, Row{std::int64_t{1}, std::string("ten bytes!"), 0.5, Bytes{1, 2, 3}});
  put(t, Row{std::int64_t{2}, std::string("0123456789"), -2.25, std::monostate{}});
  CHECK(from_compact(to_compact(t).bytes).same_as(t));
}

TEST_CASE("text over 255 bytes names the record and field") {
  Table t;
  t.schema = readings_schema();
  put(t, Row{std::int64_t{7}, std::string(300, 'x'), std::monostate{}, std::monostate{}});
  put(t, Row{std::int64_t{8}, std::string(255, 'y'), std::monostate{}, std::monostate{}});
  try {
    to_compact(t);
    FAIL("expected ConversionLoss");
  } catch (const ConversionError& e) {
    CHECK(e.code() == Errc::ConversionLoss);
    REQUIRE(e.issues().size() == 1);
    CHECK(e.issues()[0].table == "readings");
    CHECK(store::same(e.issues()[0].key, store::Key{std::int64_t{7}}));
    CHECK(e.issues()[0].column == "label");
    CHECK(std::string(e.what()).find("readings key [7] label") != std::string::npos);
  }
}

TEST_CASE("all offending fields are reported, across tables") {
  store::TableSet set;
  set.add_table(readings_schema());
  auto s2 = readings_schema();
  s2.name = "other";
  set.add_table(s2);
  put(set.table("readings"), Row{std::int64_t{1}, std::string(256, 'a'), 1e300, std::monostate{}});
  put(set.table("other"), Row{std::int64_t{2}, std::monostate{}, std::monostate{}, Bytes(70000)});
  try {
    to_compact(set);
    FAIL("expected ConversionLoss");
  } catch (const ConversionError& e) {
    REQUIRE(e.issues().size() == 3);
    CHECK(e.issues()[0].table == "other");
    CHECK(e.issues()[0].column == "raw");
    CHECK(e.issues()[1].column == "label");
    CHECK(e.issues()[2].column == "level");
  }
}

TEST_CASE("0.1 is narrowed and flagged") {
  Table t;
  t.schema = readings_schema();
  put(t, Row{std::int64_t{1}, std::monostate{}, 0.1, std::monostate{}});
  const auto image = to_compact(t);
  REQUIRE(image.narrowed.size() == 1);
  CHECK(image.narrowed[0].column == "level");
  CHECK(image.narrowed[0].original == 0.1);
  CHECK(image.narrowed[0].stored == static_cast<double>(0.1f));
  const auto back = from_compact(image.bytes);
  CHECK(std::get<double>(back.rows.begin()->second[2]) == static_cast<double>(0.1f));
  // Narrowing is idempotent and the two copies agree under conversion.
  CHECK(to_compact(back).narrowed.empty());
  CHECK(same_under_conversion(t, back));
}

TEST_CASE("property: the precision flag matches exact binary32 representability") {
  std::mt19937_64 rng(77);
  int flagged = 0;
  int exact = 0;
  for (int i = 0; i < 20000; ++i) {
    double x;
    switch (rng() % 5) {
      case 0: x = static_cast<double>(std::uniform_real_distribution<float>(-1e3f, 1e3f)(rng)); break;
      case 1: x = std::ldexp(static_cast<double>(rng() % (1 << 24)), static_cast<int>(rng() % 270) - 170); break;
      case 2: x = std::ldexp(static_cast<double>(rng() % (1ull << 30)), static_cast<int>(rng() % 60) - 30); break;
      case 3: x = static_cast<double>(rng() % 100) / 10.0; break;
      default: {
        const std::uint64_t bits = rng();
        std::memcpy(&x, &bits, sizeof x);
        if (!std::isfinite(x) || std::fabs(x) > 3e38) x = 1.0 / 3.0;
      }
    }
    Table t;
    t.schema = readings_schema();
    put(t, Row{std::int64_t{1}, std::monostate{}, x, std::monostate{}});
    const auto image = to_compact(t);
    const bool fits = fits_binary32(x);
    REQUIRE_MESSAGE(image.narrowed.empty() == fits, "x = " << x);
    (fits ? exact : flagged)++;
    // The stored value is binary32 and widening it is exact.
    const double stored = std::get<double>(from_compact(image.bytes).rows.begin()->second[2]);
    REQUIRE(fits_binary32(stored));
  }
  CHECK(flagged > 1000);
  CHECK(exact > 1000);
}

TEST_CASE("out-of-range reals are rejected, infinities are not") {
  Table t;
  t.schema = readings_schema();
  put(t, Row{std::int64_t{1}, std::monostate{}, std::numeric_limits<double>::infinity(), std::monostate{}});
  put(t, Row{std::int64_t{2}, std::monostate{}, std::nan(""), std::monostate{}});
  CHECK(to_compact(t).narrowed.empty());
  put(t, Row{std::int64_t{3}, std::monostate{}, 4e38, std::monostate{}});
  CHECK_THROWS_AS(to_compact(t), ConversionError);
}

TEST_CASE("malformed images are rejected, never crash") {
  std::mt19937_64 rng(9);
  const auto t = random_table(rng, true);
  const auto bytes = to_compact(t).bytes;
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    CHECK_THROWS_AS(from_compact(ByteView(bytes).first(n)), Error);
  }
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    auto bad = bytes;
    bad[i] ^= 0x20;
    CHECK_THROWS_AS(from_compact(bad), Error);
  }
}

TEST_CASE("the image layout is fixed") {
  Table t;
  t.schema.name = "t";
  t.schema.columns = {{"k", ColumnType::Integer, false}, {"v", ColumnType::Real, true}};
  t.schema.key = {0};
  t.revision = 2;
  t.modified_at = 3;
  put(t, Row{std::int64_t{1}, 1.5});
  const auto bytes = to_compact(t).bytes;
  const std::string expected =
      "43544231"          // CTB1
      "0174"              // "t"
      "02"                // two columns
      "016B0000"          // k INTEGER not null
      "01760101"          // v REAL nullable
      "0100"              // key: column 0
      "0200000000000000"  // revision
      "0300000000000000"  // modified_at
      "01000000"          // one row
      "010100000000000000"  // INTEGER 1
      "020000C03F";         // REAL 1.5f
  CHECK(to_hex(ByteView(bytes).first(bytes.size() - 2)) == expected);
}

TEST_CASE("content digest ignores revision and stamp") {
  std::mt19937_64 rng(3);
  auto a = random_table(rng, true);
  auto b = a;
  b.revision += 5;
  b.modified_at += 99;
  CHECK(content_digest(a) == content_digest(b));
  put(b, Row{std::int64_t{9999}, std::monostate{}, std::monostate{}, std::monostate{}});
  CHECK(content_digest(a) != content_digest(b));
}

TEST_CASE("wire messages") {
  const Message m{MsgType::PullTable, Bytes{1, 't'}};
  CHECK(to_hex(encode_message(m)) == "030000000301" "74");
  Manifest man{"hh1", {{"events", true, 7, 100, 5, Digest{}}, {"users", false, 0, 0, std::nullopt, Digest{}}}};
  const auto enc = encode_manifest(man);
  const auto back = decode_manifest(enc.body);
  CHECK(back.device_id == "hh1");
  REQUIRE(back.tables.size() == 2);
  CHECK(back.tables[0].revision == 7);
  CHECK(back.tables[0].base == 5);
  CHECK_FALSE(back.tables[1].present);
  CHECK_FALSE(back.tables[1].base);
  for (std::size_t n = 0; n < enc.body.size(); ++n) {
    CHECK_THROWS_AS(decode_manifest(ByteView(enc.body).first(n)), Error);
  }
  auto longer = enc.body;
  longer.push_back(0);
  CHECK_THROWS_AS(decode_manifest(longer), Error);
  const auto ack = decode_ack(make_ack(Status::QuotaExceeded, "full"));
  CHECK(ack.status == Status::QuotaExceeded);
  CHECK(ack.text == "full");
  CHECK_THROWS_AS(decode_ack(m), Error);
}
