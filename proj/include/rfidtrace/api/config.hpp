#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfidtrace/store/sealed_container.hpp"

namespace rfidtrace::api {

// Service configuration (JSON). Relative paths are resolved against the
// directory holding the config file.
//
//   {
//     "listen": "127.0.0.1:8080",
//     "store": "store",                     // store directory
//     "passphrase_env": "RFIDTRACE_PASS",   // either of these enables encryption
//     "passphrase_file": "secret.txt",
//     "kdf": "interactive",                 // or "minimal" (testing only)
//     "durable": true,
//     "world": "world.json",                // optional simulator world
//     "stations": [{"addr": 3, "reader": 3, "name": "dock", "password": "1234",
//                   "profile": "standard"}],
//     "devices": [{"id": "hh1", "dir": "devices/hh1"},
//                 {"id": "hh2", "endpoint": "10.0.0.7:7700"}],
//     "sync_tables": ["transponders", "stations", ...],
//     "session_hours": 8,
//     "poll_interval_ms": 1000             // serve mode background polling; 0 = off
//   }

struct StationConfig {
  std::uint8_t addr = 0;
  std::uint16_t reader = 0;
  std::string name;
  std::string password = "0000";
  /// Reader profile used when the world has no such reader yet.
  std::string profile = "standard";
};

struct DeviceConfig {
  std::string id;
  /// Local compact store served over an in-process pipe.
  std::optional<std::filesystem::path> dir;
  /// Remote device agent, "host:port".
  std::optional<std::string> endpoint;
  std::uint64_t capacity_bytes = 64ull << 20;
};

struct ServiceConfig {
  std::string listen = "127.0.0.1:8080";
  std::filesystem::path store_dir = "store";
  std::optional<std::string> passphrase;
  store::KdfParams kdf = store::KdfParams::interactive();
  bool durable = true;
  std::optional<std::filesystem::path> world;
  std::vector<StationConfig> stations;
  std::vector<DeviceConfig> devices;
  std::vector<std::string> sync_tables;
  double session_hours = 8;
  std::uint32_t poll_interval_ms = 1000;
};

/// Throws BadConfig naming the offending key. Reads the passphrase from the
/// environment or file it points at.
ServiceConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
ServiceConfig load_config(const std::filesystem::path& path);

/// Tables a device gets when the config names none (everything but users).
std::vector<std::string> default_sync_tables();

}  // namespace rfidtrace::api
