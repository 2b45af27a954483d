#pragma once

#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rfidtrace/api/config.hpp"
#include "rfidtrace/api/sessions.hpp"
#include "rfidtrace/net/bus.hpp"
#include "rfidtrace/net/master.hpp"
#include "rfidtrace/rf/world.hpp"
#include "rfidtrace/store/alarms.hpp"
#include "rfidtrace/store/persistence.hpp"
#include "rfidtrace/sync/device_agent.hpp"
#include "rfidtrace/sync/device_link.hpp"

namespace rfidtrace::api {

/// Result of one API call as sent over the wire:
///   {"ok": true, "result": ...}
///   {"ok": false, "error": {"code": "store.DuplicateKey", "message": "..."}}
struct Reply {
  int http_status = 200;
  nlohmann::json body;
};

/// Table and access an endpoint needs. Simulation, sync and device file
/// endpoints use the pseudo tables "simulation", "sync" and "device_files",
/// which the role matrix treats like any non-user table.
struct Requirement {
  std::string table;
  store::Access access = store::Access::Read;
};

class Service {
 public:
  struct Options {
    SessionTable::Clock session_clock;
    store::Datastore::Clock store_clock;
  };

  /// Opens the store, the simulated world and the device links. Throws with
  /// a precise message on an unreadable store or a malformed world file.
  explicit Service(ServiceConfig config, Options options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Runs one endpoint and returns its result; throws on failure. No token
  /// means the local administrator (CLI without a server).
  nlohmann::json handle(std::string_view endpoint, const nlohmann::json& body,
                        const std::optional<std::string>& token);
  /// handle() wrapped in the response envelope; never throws.
  Reply call(std::string_view endpoint, const nlohmann::json& body, const std::optional<std::string>& token);

  static const std::vector<std::string>& endpoints();
  /// nullopt for endpoints open without a session (health, login).
  static std::optional<Requirement> requirement(std::string_view endpoint);

  /// Background polling every config().poll_interval_ms; no-op when 0.
  void start_polling();
  void stop_polling();

  store::Datastore& store() noexcept { return store_dir_->store(); }
  const ServiceConfig& config() const noexcept { return config_; }
  SessionTable& sessions() noexcept { return sessions_; }

 private:
  struct Caller {
    std::string username;
    store::Role role = store::Role::Admin;
    std::optional<std::string> token;
    store::Actor actor() const { return store::Actor::as(role); }
  };
  struct StationSlot {
    StationConfig config;
    std::unique_ptr<net::Station> station;
  };
  struct Device {
    DeviceConfig config;
    std::unique_ptr<sync::CompactStore> local;
    std::unique_ptr<sync::InProcessDevice> agent;
    std::unique_ptr<sync::DeviceLink> link;
  };
  using Handler = nlohmann::json (Service::*)(const Caller&, const nlohmann::json&);

  static const std::map<std::string, std::pair<Handler, std::optional<Requirement>>, std::less<>>& routes();

  Caller authenticate(const std::optional<std::string>& token);

  // Simulation plumbing; callers hold sim_mutex_.
  void deliver(const std::vector<rf::FieldEvent>& events);
  void ensure_readers();
  StationSlot& slot_at(std::uint8_t addr);
  void save_runtime_locked();
  nlohmann::json poll_locked();
  void raise_alarms(const std::vector<store::AlarmRaised>& raised, std::uint64_t now_us);
  std::uint32_t next_central_seq() const;
  void note_sighting(const rf::Uid& uid, std::uint8_t station, std::uint64_t at_us);
  void sync_station_rows(const std::vector<std::uint8_t>& timeouts = {});

  Device& device(const nlohmann::json& body);

  // Endpoints.
  nlohmann::json health(const Caller&, const nlohmann::json&);
  nlohmann::json login(const Caller&, const nlohmann::json&);
  nlohmann::json logout(const Caller&, const nlohmann::json&);
  nlohmann::json whoami(const Caller&, const nlohmann::json&);
  nlohmann::json template_define(const Caller&, const nlohmann::json&);
  nlohmann::json template_list(const Caller&, const nlohmann::json&);
  nlohmann::json template_get(const Caller&, const nlohmann::json&);
  nlohmann::json template_delete(const Caller&, const nlohmann::json&);
  nlohmann::json tag_write(const Caller&, const nlohmann::json&);
  nlohmann::json tag_read(const Caller&, const nlohmann::json&);
  nlohmann::json station_list(const Caller&, const nlohmann::json&);
  nlohmann::json station_set(const Caller&, const nlohmann::json&);
  nlohmann::json inventory(const Caller&, const nlohmann::json&);
  nlohmann::json poll(const Caller&, const nlohmann::json&);
  nlohmann::json events_query(const Caller&, const nlohmann::json&);
  nlohmann::json alarm_define(const Caller&, const nlohmann::json&);
  nlohmann::json alarm_list(const Caller&, const nlohmann::json&);
  nlohmann::json alarm_delete(const Caller&, const nlohmann::json&);
  nlohmann::json report_define(const Caller&, const nlohmann::json&);
  nlohmann::json report_list(const Caller&, const nlohmann::json&);
  nlohmann::json report_delete(const Caller&, const nlohmann::json&);
  nlohmann::json report_render(const Caller&, const nlohmann::json&);
  nlohmann::json sim_load(const Caller&, const nlohmann::json&);
  nlohmann::json sim_add_tag(const Caller&, const nlohmann::json&);
  nlohmann::json sim_move(const Caller&, const nlohmann::json&);
  nlohmann::json sim_advance(const Caller&, const nlohmann::json&);
  nlohmann::json sim_state(const Caller&, const nlohmann::json&);
  nlohmann::json sync_run(const Caller&, const nlohmann::json&);
  nlohmann::json sync_manifest(const Caller&, const nlohmann::json&);
  nlohmann::json sync_state(const Caller&, const nlohmann::json&);
  nlohmann::json sync_connect(const Caller&, const nlohmann::json&);
  nlohmann::json sync_disconnect(const Caller&, const nlohmann::json&);
  nlohmann::json device_put(const Caller&, const nlohmann::json&);
  nlohmann::json device_get(const Caller&, const nlohmann::json&);
  nlohmann::json device_delete(const Caller&, const nlohmann::json&);
  nlohmann::json device_mkdir(const Caller&, const nlohmann::json&);
  nlohmann::json device_rmdir(const Caller&, const nlohmann::json&);
  nlohmann::json device_stat(const Caller&, const nlohmann::json&);
  nlohmann::json user_create(const Caller&, const nlohmann::json&);
  nlohmann::json user_list(const Caller&, const nlohmann::json&);
  nlohmann::json user_set(const Caller&, const nlohmann::json&);
  nlohmann::json user_delete(const Caller&, const nlohmann::json&);

  ServiceConfig config_;
  std::unique_ptr<store::StoreDirectory> store_dir_;
  std::unique_ptr<store::SealingKey> runtime_key_;
  SessionTable sessions_;

  std::mutex sim_mutex_;
  rf::World world_;
  std::vector<StationSlot> stations_;
  std::unique_ptr<net::InProcessBus> bus_;
  std::unique_ptr<net::Master> master_;
  store::AlarmEngine alarms_;

  std::map<std::string, Device, std::less<>> devices_;

  std::mutex poll_mutex_;
  std::condition_variable poll_cv_;
  bool poll_stop_ = false;
  std::thread poll_thread_;
};

}  // namespace rfidtrace::api
