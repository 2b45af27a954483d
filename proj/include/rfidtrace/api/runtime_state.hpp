#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "rfidtrace/net/station.hpp"
#include "rfidtrace/store/alarms.hpp"
#include "rfidtrace/store/sealed_container.hpp"

namespace rfidtrace::api {

/// Everything outside the datastore that must survive a restart: the
/// simulated world, each station's memory (keyed by its reader), the
/// master's acknowledged sequence numbers and the alarm engine.
struct RuntimeState {
  nlohmann::json world;
  std::map<rf::ReaderId, net::Station::State> stations;
  std::map<std::uint8_t, std::uint32_t> acked;
  store::AlarmEngine::State alarms;
};

nlohmann::json to_json(const RuntimeState& s);
RuntimeState runtime_from_json(const nlohmann::json& j);

/// runtime.json in plain mode, runtime.enc (sealed) when `key` is given.
/// Replaced atomically.
void save_runtime(const std::filesystem::path& store_dir, const RuntimeState& s, store::SealingKey* key,
                  bool durable);
std::optional<RuntimeState> load_runtime(const std::filesystem::path& store_dir, store::SealingKey* key);

}  // namespace rfidtrace::api
