#pragma once

// A world with stations attached to an in-process bus.

#include <map>
#include <memory>

#include "rfidtrace/net/bus.hpp"
#include "rfidtrace/net/master.hpp"
#include "rfidtrace/net/station.hpp"
#include "rfidtrace/rf/world.hpp"

namespace gen {

inline rfidtrace::rf::Uid tag_uid(std::uint64_t low) {
  return rfidtrace::rf::Uid::from_value((std::uint64_t{0xE0} << 56) | low);
}

inline const rfidtrace::net::Password kPassword{'1', '2', '3', '4'};

struct NetRig {
  rfidtrace::rf::World world;
  std::map<std::uint8_t, std::unique_ptr<rfidtrace::net::Station>> stations;
  rfidtrace::net::InProcessBus bus{[this] { return world.now_us(); }};
  rfidtrace::net::Master master{bus};

  rfidtrace::net::Station& add_station(std::uint8_t addr, const char* profile = "long") {
    world.add_reader(addr, rfidtrace::rf::default_profile(profile));
    auto s = std::make_unique<rfidtrace::net::Station>(addr, kPassword, world, addr);
    bus.attach(*s);
    master.register_station(addr, kPassword);
    return *stations.emplace(addr, std::move(s)).first->second;
  }

  void deliver(const std::vector<rfidtrace::rf::FieldEvent>& events) {
    for (const auto& e : events) {
      auto it = stations.find(static_cast<std::uint8_t>(e.reader));
      if (it != stations.end()) it->second->on_field_event(e);
    }
  }

  void place(std::uint64_t low, std::uint8_t addr, double cm) {
    deliver(world.add_tag(rfidtrace::rf::TagEmulation(tag_uid(low), 64, 4, cm), addr));
  }
  void move(std::uint64_t low, double cm) { deliver(world.move_tag(tag_uid(low), cm)); }
};

}  // namespace gen
