#pragma once

// Central store + in-process handheld for sync tests.

#include <memory>
#include <string>

#include "rfidtrace/sync/device_agent.hpp"
#include "rfidtrace/sync/session.hpp"
#include "support/temp_dir.hpp"

namespace gen {

using namespace rfidtrace;

struct SyncRig {
  test::TempDir dir;
  std::uint64_t central_now = 1000;
  std::uint64_t device_now = 1000;
  store::Datastore central{store::TableSet::central(), [this] { return central_now; }};
  std::unique_ptr<sync::CompactStore> device;
  std::unique_ptr<sync::InProcessDevice> host;
  std::unique_ptr<sync::DeviceLink> link;

  explicit SyncRig(std::uint64_t capacity = 4u << 20) {
    sync::CompactStore::Options o;
    o.device_id = "hh1";
    o.capacity_bytes = capacity;
    o.clock = [this] { return device_now; };
    device = std::make_unique<sync::CompactStore>(dir.path() / "device", o);
    host = std::make_unique<sync::InProcessDevice>(*device);
    link = std::make_unique<sync::DeviceLink>("hh1", host->connector(), std::chrono::seconds(5));
  }

  ~SyncRig() {
    link.reset();
    host.reset();
  }

  sync::SyncReport sync(std::vector<std::string> tables) {
    link->connect();
    return sync::sync_session(*link, central, {std::move(tables), dir.path() / "conflicts"});
  }

  void station(std::int64_t addr, std::string name) {
    central.upsert(store::Actor::internal(), store::tables::kStations,
                   store::Row{addr, std::move(name), std::int64_t{1}, std::string("ok")});
  }

  void transponder(std::int64_t n, std::int64_t station) {
    char uid[17];
    std::snprintf(uid, sizeof uid, "E0040000%08llX", static_cast<unsigned long long>(n));
    central.upsert(store::Actor::internal(), store::tables::kTransponders,
                   store::Row{std::string(uid), std::int64_t{1}, std::int64_t{1}, std::monostate{}, station,
                              std::int64_t{n * 10}});
  }

  void event(std::int64_t station, std::int64_t seq) {
    central.upsert(store::Actor::internal(), store::tables::kEvents,
                   store::Row{station, seq, std::string("TAG_ENTER"), std::monostate{}, seq * 100, seq * 100 + 1,
                              std::monostate{}});
  }

  const sync::TableOutcome& outcome(const sync::SyncReport& r, std::string_view table) {
    for (const auto& t : r.tables) {
      if (t.table == table) return t;
    }
    throw std::runtime_error("no outcome for table");
  }

  bool converged(std::string_view table) {
    auto d = device->table(table);
    const auto c = central.table_copy(store::Actor::internal(), table);
    if (!d) return c.revision == 0;
    return d->revision == c.revision && sync::same_under_conversion(*d, c);
  }
};

}  // namespace gen
