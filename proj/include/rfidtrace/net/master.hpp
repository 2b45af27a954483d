#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "rfidtrace/net/bus.hpp"
#include "rfidtrace/net/event_ring.hpp"
#include "rfidtrace/net/station.hpp"

namespace rfidtrace::net {

struct NetworkConfig {
  std::uint8_t master_id = 0;
  std::size_t max_stations = kMaxStations;
  /// PC-to-master backhaul reach; informational only.
  std::uint32_t backhaul_range_m = 1000;
};

struct StationBatch {
  std::uint8_t addr = 0;
  std::vector<EventRecord> events;
};

/// Records were lost to ring eviction (or a CLEAR_EVENTS) before the master
/// acknowledged them.
struct SeqGap {
  std::uint8_t addr = 0;
  std::uint32_t expected = 0;
  std::uint32_t received = 0;
};

struct PollResult {
  std::vector<StationBatch> batches;  // roster order, events ascending by seq
  std::vector<std::uint8_t> timeouts;
  std::vector<SeqGap> gaps;
  /// Stations that answered, for liveness tracking.
  std::vector<std::uint8_t> responsive;

  std::size_t event_count() const;
};

struct PingInfo {
  std::uint8_t addr = 0;
  std::uint8_t firmware_major = 0;
  std::uint8_t firmware_minor = 0;
  std::uint16_t event_count = 0;
  std::uint32_t last_seq = 0;
};

struct InventoryReply {
  std::vector<rf::Uid> uids;
  bool truncated = false;
};

struct BlockRead {
  std::size_t block_size = 0;
  Bytes data;
};

/// Bus master: owns the station roster and the acknowledged sequence number
/// per station. Commands go out one at a time through the transport.
class Master {
 public:
  explicit Master(Transport& transport, NetworkConfig config = {});

  /// Throws BadAddress, DuplicateAddress, or TooManyStations.
  void register_station(std::uint8_t addr, Password password, std::uint32_t acked_seq = 0);
  void unregister_station(std::uint8_t addr);
  std::vector<std::uint8_t> roster() const;
  bool registered(std::uint8_t addr) const { return roster_.contains(addr); }
  std::uint32_t acked_seq(std::uint8_t addr) const;
  const NetworkConfig& config() const noexcept { return config_; }

  /// Drains every station in roster order with GET_EVENTS(acked_seq).
  /// Unreachable stations are reported and skipped.
  PollResult poll_cycle();

  PingInfo ping(std::uint8_t addr);
  InventoryReply inventory(std::uint8_t addr);
  BlockRead read_tag(std::uint8_t addr, const rf::Uid& uid, std::size_t first, std::size_t count);
  /// Splits into frame-sized chunks aligned to the tag's block size; each
  /// chunk is atomic on the tag.
  void write_tag(std::uint8_t addr, const rf::Uid& uid, std::size_t first, ByteView data,
                 std::size_t block_size);
  void set_address(std::uint8_t addr, std::uint8_t new_addr);
  void set_baud(std::uint8_t addr, BaudClass baud);
  void set_password(std::uint8_t addr, Password new_password);
  void clear_events(std::uint8_t addr);
  void broadcast(Command cmd, ByteView payload);

 private:
  struct Entry {
    Password password{};
    std::uint32_t acked_seq = 0;
  };

  Entry& entry(std::uint8_t addr);
  /// Sends one command and returns the response payloads with status
  /// checked; bodies start after the status and flags bytes.
  std::vector<Frame> exchange(std::uint8_t addr, Command cmd, ByteView payload);
  Bytes with_password(std::uint8_t addr, ByteView rest);

  Transport& transport_;
  NetworkConfig config_;
  std::map<std::uint8_t, Entry> roster_;
};

}  // namespace rfidtrace::net
