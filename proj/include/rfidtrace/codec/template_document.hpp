#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "rfidtrace/codec/field.hpp"

namespace rfidtrace::codec {

// Template definition documents are JSON objects, one template per document:
//
//   {
//     "template_id": 1,              // 0..65535
//     "version": 0,                  // 0..255
//     "name": "asset",
//     "fields": [
//       {"name": "loc",   "type": "string", "max_len": 8},
//       {"name": "qty",   "type": "integer"},
//       {"name": "price", "type": "real"},
//       {"name": "grade", "type": "character"}
//     ]
//   }
//
// Unknown keys are rejected. See docs/formats.md.

Template template_from_json(const nlohmann::json& doc);
nlohmann::json template_to_json(const Template& tmpl);
Template parse_template_document(std::string_view text);

/// Character: one-byte string or integer 0..255. String: JSON string.
/// Integer: JSON integer in int32 range. Real: any JSON number.
FieldValue value_from_json(const FieldDef& field, const nlohmann::json& value);
nlohmann::json value_to_json(const FieldValue& value);

}  // namespace rfidtrace::codec
