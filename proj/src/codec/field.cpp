#include "rfidtrace/codec/field.hpp"

#include <bit>
#include <set>

#include "rfidtrace/codec/codec.hpp"

namespace rfidtrace::codec {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::Overflow: return "Overflow";
    case Errc::CapacityExceeded: return "CapacityExceeded";
    case Errc::BadMagic: return "BadMagic";
    case Errc::UnknownTemplate: return "UnknownTemplate";
    case Errc::CrcMismatch: return "CrcMismatch";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::MalformedBody: return "MalformedBody";
    case Errc::InvalidTemplate: return "InvalidTemplate";
    case Errc::DuplicateTemplate: return "DuplicateTemplate";
    case Errc::BadDocument: return "BadDocument";
  }
  return "Unknown";
}

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::Character: return "character";
    case FieldKind::String: return "string";
    case FieldKind::Integer: return "integer";
    case FieldKind::Real: return "real";
  }
  return "?";
}

std::size_t FieldType::encoded_width() const noexcept {
  switch (kind_) {
    case FieldKind::Character: return 1;
    case FieldKind::String: return 2 + max_len_;
    case FieldKind::Integer: return 4;
    case FieldKind::Real: return 8;
  }
  return 0;
}

FieldKind kind_of(const FieldValue& value) {
  switch (value.index()) {
    case 0: return FieldKind::Character;
    case 1: return FieldKind::String;
    case 2: return FieldKind::Integer;
    default: return FieldKind::Real;
  }
}

bool same_value(const FieldValue& a, const FieldValue& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<double>(&a)) {
    return std::bit_cast<std::uint64_t>(*x) == std::bit_cast<std::uint64_t>(std::get<double>(b));
  }
  return a == b;
}

bool operator==(const TagPayload& a, const TagPayload& b) {
  if (a.template_id != b.template_id || a.version != b.version) return false;
  if (a.values.size() != b.values.size()) return false;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (!same_value(a.values[i], b.values[i])) return false;
  }
  return true;
}

void validate(const Template& tmpl, std::size_t capacity) {
  std::set<std::string_view> names;
  for (const auto& field : tmpl.fields) {
    if (field.name.empty() || field.name.size() > kMaxFieldNameLength) {
      throw Error(Errc::InvalidTemplate, "field name must be 1.." +
                                             std::to_string(kMaxFieldNameLength) + " bytes");
    }
    if (!names.insert(field.name).second) {
      throw Error(Errc::InvalidTemplate, "duplicate field name '" + field.name + "'");
    }
    if (field.type.kind() == FieldKind::String &&
        (field.type.max_len() < 1 || field.type.max_len() > kMaxStringLength)) {
      throw Error(Errc::InvalidTemplate, "string field '" + field.name + "' max_len must be 1.." +
                                             std::to_string(kMaxStringLength));
    }
  }
  const auto size = encoded_size(tmpl);
  if (size > capacity) {
    throw Error(Errc::CapacityExceeded, "encoded size " + std::to_string(size) +
                                            " exceeds tag capacity " + std::to_string(capacity));
  }
}

}  // namespace rfidtrace::codec
