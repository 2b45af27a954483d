#include "rfidtrace/api/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "rfidtrace/api/error.hpp"
#include "rfidtrace/net/frame.hpp"
#include "rfidtrace/rf/field.hpp"
#include "rfidtrace/store/schema.hpp"

namespace rfidtrace::api {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> default_sync_tables() {
  namespace t = store::tables;
  return {t::kTransponders, t::kStations, t::kEvents, t::kTemplates, t::kReportPatterns, t::kAlarmRules};
}

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(Errc::BadConfig, where + ": " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(where, "must be an object");
  for (const auto& [k, _] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) bad(where, "unknown key '" + k + "'");
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(where + "." + key, "wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string read_text(const fs::path& p, const std::string& where) {
  std::ifstream in(p, std::ios::binary);
  if (!in) bad(where, "cannot read " + p.string());
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

}  // namespace

ServiceConfig config_from_json(const json& j, const fs::path& base) {
  only_keys(j, "config", {"listen", "store", "passphrase_env", "passphrase_file", "kdf", "durable", "world",
                          "stations", "devices", "sync_tables", "session_hours", "poll_interval_ms"});
  ServiceConfig c;
  c.listen = get<std::string>(j, "listen", "config", c.listen);
  c.store_dir = resolve(base, get<std::string>(j, "store", "config", "store"));
  if (j.contains("passphrase_env") && j.contains("passphrase_file")) {
    bad("config", "passphrase_env and passphrase_file are exclusive");
  }
  if (j.contains("passphrase_env")) {
    const auto var = get<std::string>(j, "passphrase_env", "config", "");
    const char* value = std::getenv(var.c_str());
    if (!value || !*value) bad("config.passphrase_env", "environment variable " + var + " is not set");
    c.passphrase = value;
  }
  if (j.contains("passphrase_file")) {
    auto text = read_text(resolve(base, get<std::string>(j, "passphrase_file", "config", "")), "config.passphrase_file");
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    if (text.empty()) bad("config.passphrase_file", "file is empty");
    c.passphrase = text;
  }
  const auto kdf = get<std::string>(j, "kdf", "config", "interactive");
  if (kdf == "interactive") {
    c.kdf = store::KdfParams::interactive();
  } else if (kdf == "minimal") {
    c.kdf = store::KdfParams::minimal();
  } else {
    bad("config.kdf", "expected \"interactive\" or \"minimal\"");
  }
  c.durable = get<bool>(j, "durable", "config", true);
  if (j.contains("world")) c.world = resolve(base, get<std::string>(j, "world", "config", ""));

  std::set<int> addrs;
  std::set<int> readers;
  const auto stations = j.value("stations", json::array());
  if (!stations.is_array()) bad("config.stations", "must be an array");
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const auto where = "config.stations[" + std::to_string(i) + "]";
    const auto& s = stations[i];
    only_keys(s, where, {"addr", "reader", "name", "password", "profile"});
    if (!s.contains("addr")) bad(where, "addr is required");
    const auto addr = get<int>(s, "addr", where, 0);
    if (addr < 0 || addr > net::kMaxStationAddress) bad(where + ".addr", "must be 0..29");
    if (!addrs.insert(addr).second) bad(where + ".addr", "duplicate address " + std::to_string(addr));
    StationConfig sc;
    sc.addr = static_cast<std::uint8_t>(addr);
    const auto reader = get<int>(s, "reader", where, addr);
    if (reader < 0 || reader > 65535) bad(where + ".reader", "must be 0..65535");
    if (!readers.insert(reader).second) bad(where + ".reader", "reader shared by two stations");
    sc.reader = static_cast<std::uint16_t>(reader);
    sc.name = get<std::string>(s, "name", where, "station " + std::to_string(addr));
    sc.password = get<std::string>(s, "password", where, sc.password);
    if (sc.password.size() != 4) bad(where + ".password", "must be exactly 4 characters");
    sc.profile = get<std::string>(s, "profile", where, sc.profile);
    try {
      rf::default_profile(sc.profile);
    } catch (const std::exception&) {
      bad(where + ".profile", "unknown profile '" + sc.profile + "'");
    }
    c.stations.push_back(std::move(sc));
  }
  if (c.stations.size() > net::kMaxStations) bad("config.stations", "at most 30 stations per master");

  std::set<std::string> ids;
  const auto devices = j.value("devices", json::array());
  if (!devices.is_array()) bad("config.devices", "must be an array");
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const auto where = "config.devices[" + std::to_string(i) + "]";
    const auto& d = devices[i];
    only_keys(d, where, {"id", "dir", "endpoint", "capacity_bytes"});
    DeviceConfig dc;
    dc.id = get<std::string>(d, "id", where, "");
    if (dc.id.empty() || dc.id.size() > 255) bad(where + ".id", "required, at most 255 bytes");
    if (!ids.insert(dc.id).second) bad(where + ".id", "duplicate device " + dc.id);
    if (d.contains("dir") == d.contains("endpoint")) bad(where, "needs exactly one of dir or endpoint");
    if (d.contains("dir")) dc.dir = resolve(base, get<std::string>(d, "dir", where, ""));
    if (d.contains("endpoint")) dc.endpoint = get<std::string>(d, "endpoint", where, "");
    dc.capacity_bytes = get<std::uint64_t>(d, "capacity_bytes", where, dc.capacity_bytes);
    c.devices.push_back(std::move(dc));
  }

  c.sync_tables = get<std::vector<std::string>>(j, "sync_tables", "config", default_sync_tables());
  for (const auto& t : c.sync_tables) {
    try {
      store::builtin_schema(t);
    } catch (const std::exception&) {
      bad("config.sync_tables", "unknown table '" + t + "'");
    }
  }
  c.session_hours = get<double>(j, "session_hours", "config", 8.0);
  if (!(c.session_hours > 0)) bad("config.session_hours", "must be positive");
  c.poll_interval_ms = get<std::uint32_t>(j, "poll_interval_ms", "config", 1000);
  return c;
}

ServiceConfig load_config(const fs::path& path) {
  const auto text = read_text(path, "config");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(path.string(), e.what());
  }
  return config_from_json(j, fs::absolute(path).parent_path());
}

}  // namespace rfidtrace::api
