#include "rfidtrace/store/records.hpp"

namespace rfidtrace::store {

namespace {

template <typename T>
Value opt(const std::optional<T>& v) {
  if (!v) return std::monostate{};
  return static_cast<std::int64_t>(*v);
}

}  // namespace

Row event_row(const net::EventRecord& e, std::uint64_t ingest_time, const std::optional<std::string>& detail) {
  return Row{std::int64_t{e.station},
             std::int64_t{e.seq},
             std::string(net::to_string(e.kind)),
             e.uid ? Value(e.uid->hex()) : Value(std::monostate{}),
             static_cast<std::int64_t>(e.sim_timestamp_us),
             static_cast<std::int64_t>(ingest_time),
             detail ? Value(*detail) : Value(std::monostate{})};
}

net::EventRecord event_from_row(const Row& row) {
  net::EventRecord e;
  e.station = static_cast<std::uint8_t>(std::get<std::int64_t>(row.at(0)));
  e.seq = static_cast<std::uint32_t>(std::get<std::int64_t>(row.at(1)));
  const auto kind = net::parse_event_kind(std::get<std::string>(row.at(2)));
  if (!kind) throw Error(Errc::Corrupt, "unknown event kind " + std::get<std::string>(row.at(2)));
  e.kind = *kind;
  if (!is_null(row.at(3))) e.uid = rf::Uid::parse(std::get<std::string>(row.at(3)));
  e.sim_timestamp_us = static_cast<std::uint64_t>(std::get<std::int64_t>(row.at(4)));
  return e;
}

Key event_key(std::uint8_t station, std::uint32_t seq) { return Key{std::int64_t{station}, std::int64_t{seq}}; }

Row station_row(std::uint8_t addr, const std::string& name, std::uint8_t baud_class, const std::string& status) {
  return Row{std::int64_t{addr}, name, std::int64_t{baud_class}, status};
}

Row transponder_row(const rf::Uid& uid, std::optional<std::uint16_t> template_id, std::optional<std::uint8_t> version,
                    const std::optional<Bytes>& payload, std::optional<std::uint8_t> station,
                    std::optional<std::uint64_t> seen) {
  return Row{uid.hex(), opt(template_id), opt(version), payload ? Value(*payload) : Value(std::monostate{}),
             opt(station), opt(seen)};
}

}  // namespace rfidtrace::store
