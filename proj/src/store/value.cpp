#include "rfidtrace/store/value.hpp"

#include <charconv>
#include <cmath>
#include <cstring>

#include "rfidtrace/common/hex.hpp"

namespace rfidtrace::store {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::Unauthorized: return "Unauthorized";
    case Errc::DuplicateKey: return "DuplicateKey";
    case Errc::NotFound: return "NotFound";
    case Errc::UnknownTable: return "UnknownTable";
    case Errc::UnknownColumn: return "UnknownColumn";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::BadCredentials: return "BadCredentials";
    case Errc::Disabled: return "Disabled";
    case Errc::WrongPassphrase: return "WrongPassphrase";
    case Errc::IntegrityFailure: return "IntegrityFailure";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::BadFilter: return "BadFilter";
    case Errc::BadPattern: return "BadPattern";
    case Errc::BadRule: return "BadRule";
    case Errc::Corrupt: return "Corrupt";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::Integer: return "INTEGER";
    case ColumnType::Real: return "REAL";
    case ColumnType::Text: return "TEXT";
    case ColumnType::Blob: return "BLOB";
  }
  return "?";
}

ColumnType parse_column_type(std::string_view name) {
  if (name == "INTEGER") return ColumnType::Integer;
  if (name == "REAL") return ColumnType::Real;
  if (name == "TEXT") return ColumnType::Text;
  if (name == "BLOB") return ColumnType::Blob;
  throw Error(Errc::TypeMismatch, "unknown column type '" + std::string(name) + "'");
}

namespace {

std::uint64_t bits_of(double d) {
  std::uint64_t b;
  std::memcpy(&b, &d, sizeof b);
  return b;
}

int rank(const Value& v) {
  switch (v.index()) {
    case 0: return 0;
    case 1:
    case 2: return 1;
    case 3: return 2;
    default: return 3;
  }
}

int sign(auto a, auto b) { return a < b ? -1 : (b < a ? 1 : 0); }

int compare_numbers(const Value& a, const Value& b) {
  if (a.index() == 1 && b.index() == 1) return sign(std::get<1>(a), std::get<1>(b));
  const bool a_real = a.index() == 2;
  const bool b_real = b.index() == 2;
  const double x = a_real ? std::get<2>(a) : 0.0;
  const double y = b_real ? std::get<2>(b) : 0.0;
  if (a_real && std::isnan(x)) return (b_real && std::isnan(y)) ? 0 : 1;
  if (b_real && std::isnan(y)) return -1;
  if (a_real && b_real) return sign(x, y);
  // Mixed integer/real: compare as long double, exact for |int| < 2^63.
  const long double lx = a_real ? static_cast<long double>(x) : static_cast<long double>(std::get<1>(a));
  const long double ly = b_real ? static_cast<long double>(y) : static_cast<long double>(std::get<1>(b));
  return sign(lx, ly);
}

}  // namespace

bool same(const Value& a, const Value& b) noexcept {
  if (a.index() != b.index()) return false;
  if (a.index() == 2) return bits_of(std::get<2>(a)) == bits_of(std::get<2>(b));
  return a == b;
}

bool same(const Row& a, const Row& b) noexcept {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same(a[i], b[i])) return false;
  }
  return true;
}

int compare(const Value& a, const Value& b) noexcept {
  const int ra = rank(a), rb = rank(b);
  if (ra != rb) return sign(ra, rb);
  switch (ra) {
    case 0: return 0;
    case 1: return compare_numbers(a, b);
    case 2: return sign(std::get<std::string>(a), std::get<std::string>(b));
    default: return sign(std::get<Bytes>(a), std::get<Bytes>(b));
  }
}

bool KeyLess::operator()(const Key& a, const Key& b) const noexcept {
  const auto n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(a[i], b[i]); c != 0) return c < 0;
  }
  return a.size() < b.size();
}

nlohmann::json value_to_json(const Value& v) {
  switch (v.index()) {
    case 0: return nullptr;
    case 1: return std::get<1>(v);
    case 2: {
      const double d = std::get<2>(v);
      if (std::isnan(d)) return "nan";
      if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
      return d;
    }
    case 3: return std::get<3>(v);
    default: return to_hex(std::get<4>(v));
  }
}

Value value_from_json(const nlohmann::json& j, ColumnType type) {
  if (j.is_null()) return std::monostate{};
  auto mismatch = [&] {
    return Error(Errc::TypeMismatch, "expected " + std::string(to_string(type)) + ", got " + j.dump());
  };
  switch (type) {
    case ColumnType::Integer:
      if (j.is_number_integer()) return j.get<std::int64_t>();
      if (j.is_number_float()) {
        const double d = j.get<double>();
        if (std::trunc(d) == d && std::fabs(d) < 9.2e18) return static_cast<std::int64_t>(d);
      }
      throw mismatch();
    case ColumnType::Real:
      if (j.is_number()) return j.get<double>();
      if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "nan") return std::nan("");
        if (s == "inf") return HUGE_VAL;
        if (s == "-inf") return -HUGE_VAL;
      }
      throw mismatch();
    case ColumnType::Text:
      if (j.is_string()) return j.get<std::string>();
      throw mismatch();
    case ColumnType::Blob:
      if (j.is_string()) {
        try {
          return from_hex(j.get_ref<const std::string&>());
        } catch (const std::invalid_argument&) {
        }
      }
      throw mismatch();
  }
  throw mismatch();
}

std::string display(const Value& v) {
  switch (v.index()) {
    case 0: return {};
    case 1: return std::to_string(std::get<1>(v));
    case 2: {
      const double d = std::get<2>(v);
      if (std::isnan(d)) return "nan";
      if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
      char buf[32];
      auto r = std::to_chars(buf, buf + sizeof buf, d);
      return std::string(buf, r.ptr);
    }
    case 3: return std::get<3>(v);
    default: return to_hex(std::get<4>(v));
  }
}

}  // namespace rfidtrace::store
