#include "rfidtrace/codec/template_document.hpp"

#include <limits>
#include <set>

namespace rfidtrace::codec {
namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw Error(Errc::BadDocument, "unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
T bounded_integer(const json& obj, const char* key, long long lo, long long hi) {
  if (!obj.contains(key) || !obj[key].is_number_integer()) {
    throw Error(Errc::BadDocument, std::string("'") + key + "' must be an integer");
  }
  auto v = obj[key].get<long long>();
  if (v < lo || v > hi) {
    throw Error(Errc::BadDocument, std::string("'") + key + "' out of range");
  }
  return static_cast<T>(v);
}

FieldType type_from_json(const json& field) {
  if (!field.contains("type") || !field["type"].is_string()) {
    throw Error(Errc::BadDocument, "field 'type' must be a string");
  }
  const auto type = field["type"].get<std::string>();
  if (type == "string") {
    return FieldType::string(bounded_integer<std::size_t>(field, "max_len", 1, kMaxStringLength));
  }
  if (field.contains("max_len")) {
    throw Error(Errc::BadDocument, "'max_len' only applies to string fields");
  }
  if (type == "character") return FieldType::character();
  if (type == "integer") return FieldType::integer();
  if (type == "real") return FieldType::real();
  throw Error(Errc::BadDocument, "unknown field type '" + type + "'");
}

}  // namespace

Template template_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::BadDocument, "template document must be an object");
  reject_unknown_keys(doc, {"template_id", "version", "name", "fields"}, "template");
  Template tmpl;
  tmpl.template_id = bounded_integer<std::uint16_t>(doc, "template_id", 0, 65535);
  tmpl.version = bounded_integer<std::uint8_t>(doc, "version", 0, 255);
  if (!doc.contains("name") || !doc["name"].is_string()) {
    throw Error(Errc::BadDocument, "'name' must be a string");
  }
  tmpl.name = doc["name"].get<std::string>();
  if (!doc.contains("fields") || !doc["fields"].is_array()) {
    throw Error(Errc::BadDocument, "'fields' must be an array");
  }
  for (const auto& field : doc["fields"]) {
    if (!field.is_object()) throw Error(Errc::BadDocument, "field entries must be objects");
    reject_unknown_keys(field, {"name", "type", "max_len"}, "field");
    if (!field.contains("name") || !field["name"].is_string()) {
      throw Error(Errc::BadDocument, "field 'name' must be a string");
    }
    tmpl.fields.push_back({field["name"].get<std::string>(), type_from_json(field)});
  }
  validate(tmpl);
  return tmpl;
}

json template_to_json(const Template& tmpl) {
  json fields = json::array();
  for (const auto& f : tmpl.fields) {
    json entry = {{"name", f.name}, {"type", std::string(to_string(f.type.kind()))}};
    if (f.type.kind() == FieldKind::String) entry["max_len"] = f.type.max_len();
    fields.push_back(std::move(entry));
  }
  return {{"template_id", tmpl.template_id},
          {"version", tmpl.version},
          {"name", tmpl.name},
          {"fields", std::move(fields)}};
}

Template parse_template_document(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::BadDocument, e.what());
  }
  return template_from_json(doc);
}

FieldValue value_from_json(const FieldDef& field, const json& value) {
  auto mismatch = [&] {
    return Error(Errc::TypeMismatch, "field '" + field.name + "' expects " +
                                         std::string(to_string(field.type.kind())));
  };
  switch (field.type.kind()) {
    case FieldKind::Character:
      if (value.is_string() && value.get_ref<const std::string&>().size() == 1) {
        return Character{static_cast<std::uint8_t>(value.get_ref<const std::string&>()[0])};
      }
      if (value.is_number_integer()) {
        auto v = value.get<long long>();
        if (v >= 0 && v <= 255) return Character{static_cast<std::uint8_t>(v)};
      }
      throw mismatch();
    case FieldKind::String:
      if (!value.is_string()) throw mismatch();
      return value.get<std::string>();
    case FieldKind::Integer: {
      if (!value.is_number_integer()) throw mismatch();
      auto v = value.get<long long>();
      if (v < std::numeric_limits<std::int32_t>::min() ||
          v > std::numeric_limits<std::int32_t>::max()) {
        throw Error(Errc::Overflow, "field '" + field.name + "' exceeds 32-bit range");
      }
      return static_cast<std::int32_t>(v);
    }
    case FieldKind::Real:
      if (!value.is_number()) throw mismatch();
      return value.get<double>();
  }
  throw mismatch();
}

json value_to_json(const FieldValue& value) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Character>) {
          if (v.value >= 0x20 && v.value < 0x7F) return std::string(1, static_cast<char>(v.value));
          return v.value;
        } else {
          return v;
        }
      },
      value);
}

}  // namespace rfidtrace::codec
