#pragma once

// Row builders for the central tables that the station network feeds.

#include <optional>
#include <string>

#include "rfidtrace/net/event_ring.hpp"
#include "rfidtrace/store/value.hpp"

namespace rfidtrace::store {

/// Station address used for events raised by the central alarm engine.
inline constexpr std::uint8_t kCentralStation = 255;

/// events row: station, seq, kind, uid, sim_timestamp, ingest_time, detail.
Row event_row(const net::EventRecord& event, std::uint64_t ingest_time,
              const std::optional<std::string>& detail = std::nullopt);
net::EventRecord event_from_row(const Row& row);
Key event_key(std::uint8_t station, std::uint32_t seq);

/// stations row: addr, name, baud_class, status.
Row station_row(std::uint8_t addr, const std::string& name, std::uint8_t baud_class, const std::string& status);

/// transponders row: uid, template_id, version, last_payload, last_station, last_seen.
Row transponder_row(const rf::Uid& uid, std::optional<std::uint16_t> template_id,
                    std::optional<std::uint8_t> version, const std::optional<Bytes>& payload,
                    std::optional<std::uint8_t> station, std::optional<std::uint64_t> seen);

}  // namespace rfidtrace::store
