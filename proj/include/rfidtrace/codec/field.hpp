#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rfidtrace/common/error.hpp"

namespace rfidtrace::codec {

enum class Errc {
  TypeMismatch,
  Overflow,
  CapacityExceeded,
  BadMagic,
  UnknownTemplate,
  CrcMismatch,
  TruncatedPayload,
  MalformedBody,
  InvalidTemplate,
  DuplicateTemplate,
  BadDocument,
};

std::string_view to_string(Errc code);
using Error = BasicError<Errc>;

/// 64 blocks of 4 bytes, the default transponder memory.
inline constexpr std::size_t kDefaultTagCapacity = 256;
inline constexpr std::size_t kHeaderSize = 6;
inline constexpr std::size_t kTrailerSize = 2;
inline constexpr std::size_t kMaxStringLength = 208;
inline constexpr std::size_t kMaxFieldNameLength = 32;
inline constexpr std::uint8_t kPayloadMagic = 0x54;

enum class FieldKind : std::uint8_t { Character, String, Integer, Real };

std::string_view to_string(FieldKind kind);

class FieldType {
 public:
  static FieldType character() { return FieldType{FieldKind::Character, 0}; }
  static FieldType string(std::size_t max_len) { return FieldType{FieldKind::String, max_len}; }
  static FieldType integer() { return FieldType{FieldKind::Integer, 0}; }
  static FieldType real() { return FieldType{FieldKind::Real, 0}; }

  FieldKind kind() const noexcept { return kind_; }
  /// Only meaningful for strings.
  std::size_t max_len() const noexcept { return max_len_; }
  /// Fixed number of body bytes this field occupies.
  std::size_t encoded_width() const noexcept;

  friend bool operator==(const FieldType&, const FieldType&) = default;

 private:
  FieldType(FieldKind kind, std::size_t max_len) : kind_(kind), max_len_(max_len) {}

  FieldKind kind_;
  std::size_t max_len_;
};

struct FieldDef {
  std::string name;
  FieldType type;

  friend bool operator==(const FieldDef&, const FieldDef&) = default;
};

struct Template {
  std::uint16_t template_id = 0;
  std::uint8_t version = 0;
  std::string name;
  std::vector<FieldDef> fields;

  friend bool operator==(const Template&, const Template&) = default;
};

struct Character {
  std::uint8_t value = 0;
  friend bool operator==(const Character&, const Character&) = default;
};

/// Text is raw bytes; no character set is implied.
using FieldValue = std::variant<Character, std::string, std::int32_t, double>;

FieldKind kind_of(const FieldValue& value);

/// Equality that compares reals bit-for-bit, so NaN payloads and signed
/// zeros roundtrip as themselves.
bool same_value(const FieldValue& a, const FieldValue& b);

struct TagPayload {
  std::uint16_t template_id = 0;
  std::uint8_t version = 0;
  std::vector<FieldValue> values;

  friend bool operator==(const TagPayload& a, const TagPayload& b);
};

/// Throws InvalidTemplate (names, string widths) or CapacityExceeded.
void validate(const Template& tmpl, std::size_t capacity = kDefaultTagCapacity);

}  // namespace rfidtrace::codec
