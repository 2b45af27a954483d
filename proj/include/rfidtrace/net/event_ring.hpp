#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "rfidtrace/common/bytes.hpp"
#include "rfidtrace/rf/uid.hpp"

namespace rfidtrace::net {

enum class EventKind : std::uint8_t {
  TagEnter = 1,
  TagLeave = 2,
  Alarm = 3,
  ConfigChange = 4,
  BufferOverrunWarning = 5,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

struct EventRecord {
  std::uint32_t seq = 0;
  std::uint8_t station = 0;
  EventKind kind = EventKind::TagEnter;
  std::optional<rf::Uid> uid;
  std::uint64_t sim_timestamp_us = 0;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Wire form inside GET_EVENTS responses (22 bytes):
/// seq:4 kind:1 flags:1 (bit0 = uid present) uid:8 timestamp_us:8.
inline constexpr std::size_t kEventWireSize = 22;
void encode_event(Bytes& out, const EventRecord& event);
/// Station comes from the enclosing frame.
EventRecord decode_event(ByteView bytes, std::size_t offset, std::uint8_t station);

inline constexpr std::size_t kEventRingCapacity = 255;

/// Fixed-capacity event journal of one station. A push into a full ring
/// evicts the oldest record. Usage above 90% (230 of 255 records) trips the
/// overrun warning once; it re-arms when usage falls back to 90% or below.
class EventRing {
 public:
  static constexpr std::size_t kWarningThreshold = 230;

  struct PushOutcome {
    bool evicted = false;
    bool crossed_warning_threshold = false;
  };

  explicit EventRing(std::size_t capacity = kEventRingCapacity);

  PushOutcome push(const EventRecord& record);
  /// Retained records with seq > after_seq, ascending, at most `limit`.
  std::vector<EventRecord> read(std::uint32_t after_seq,
                                std::size_t limit = std::numeric_limits<std::size_t>::max()) const;
  /// Drops retained records with seq <= through_seq; returns how many.
  std::size_t acknowledge(std::uint32_t through_seq);
  void clear();

  std::size_t size() const noexcept { return records_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool warning_armed() const noexcept { return armed_; }
  void set_warning_armed(bool armed) noexcept { armed_ = armed; }

 private:
  void rearm_if_below();

  std::size_t capacity_;
  std::deque<EventRecord> records_;
  bool armed_ = true;
};

}  // namespace rfidtrace::net
