#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rfidtrace/rf/world.hpp"

namespace rfidtrace::rf {

/// Turns a tag entry's "payload" object into a memory image. Supplied by
/// layers that know about templates; without one, "payload" entries are
/// rejected.
using PayloadEncoder = std::function<Bytes(const nlohmann::json& payload)>;

struct LoadedWorld {
  World world;
  /// Enter events for tags placed inside a read range, in file order.
  std::vector<FieldEvent> events;
};

// World description document (JSON):
//
//   {
//     "timing":   {"slot_duration_us": 1000, "single_read_duration_us": 8333},
//     "profiles": [{"name": "dock", "read_range_cm": 30, "write_range_cm": 15,
//                   "max_tags": 64}],
//     "readers":  [{"id": 3, "profile": "long"}],
//     "tags": [
//       {"uid": "E004010000000001", "reader": 3, "position_cm": 5,
//        "block_count": 64, "block_size": 4, "locked": [0],
//        "memory": "54010000...",            // raw image, or
//        "payload": {...}}                   // template payload (see api docs)
//     ]
//   }
//
// Every key except "tags[].uid" is optional. Built-in profiles are "short",
// "standard" and "long".
LoadedWorld parse_world_document(std::string_view text, const PayloadEncoder& encoder = {});
LoadedWorld world_from_json(const nlohmann::json& doc, const PayloadEncoder& encoder = {});

/// Full snapshot including memory images, locks and the clock; reloads to an
/// identical world.
nlohmann::json world_to_json(const World& world);

}  // namespace rfidtrace::rf
