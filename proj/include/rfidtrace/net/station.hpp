#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "rfidtrace/net/event_ring.hpp"
#include "rfidtrace/net/frame.hpp"
#include "rfidtrace/rf/world.hpp"

namespace rfidtrace::net {

using Password = std::array<std::uint8_t, 4>;

/// First byte of every response payload.
enum class Status : std::uint8_t {
  Ok = 0,
  AuthFailed = 1,
  UnknownCommand = 2,
  BadRequest = 3,
  TagNotFound = 4,
  BlockOutOfRange = 5,
  BlockLocked = 6,
};

/// Second byte of every response payload.
inline constexpr std::uint8_t kFlagMore = 0x01;
inline constexpr std::uint8_t kFlagTruncated = 0x02;
/// GET_EVENTS only: records beyond this batch are retained; ask again.
inline constexpr std::uint8_t kFlagPending = 0x04;

inline constexpr std::size_t kUidsPerFrame = 24;
inline constexpr std::size_t kEventsPerFrame = 8;
inline constexpr std::size_t kMaxReadBytes = kMaxPayload - 4;
inline constexpr std::size_t kMaxWriteBytes = kMaxPayload - 9;

inline constexpr std::uint8_t kFirmwareMajor = 1;
inline constexpr std::uint8_t kFirmwareMinor = 0;

/// Stored configuration only; there is no electrical timing model.
enum class BaudClass : std::uint8_t { B9600 = 0, B19200 = 1, B38400 = 2, B57600 = 3, B115200 = 4 };
inline constexpr std::uint8_t kMaxBaudClass = 4;

bool passwords_equal(const Password& a, const Password& b) noexcept;
Password password_from_string(std::string_view text);

/// A fixed reader node. All interaction happens through frames handed to
/// dispatch(); field events from the attached reader are recorded into the
/// station's event ring.
class Station {
 public:
  struct State {
    std::uint8_t addr = 0;
    Password password{};
    BaudClass baud = BaudClass::B9600;
    std::uint32_t last_seq = 0;
    std::vector<EventRecord> events;
    bool warning_armed = true;
  };

  Station(std::uint8_t addr, Password password, rf::World& world, rf::ReaderId reader);

  /// Handles a frame addressed to this station or broadcast. Returns the
  /// response frames; broadcasts and foreign addresses yield none.
  std::vector<Frame> dispatch(const Frame& request);

  /// Appends an event stamped with the world clock. Emits an overrun warning
  /// right after it when the ring crosses its threshold.
  void record(EventKind kind, std::optional<rf::Uid> uid = std::nullopt);
  void on_field_event(const rf::FieldEvent& event);

  std::uint8_t addr() const noexcept { return addr_; }
  rf::ReaderId reader() const noexcept { return reader_; }
  BaudClass baud() const noexcept { return baud_; }
  std::uint32_t last_seq() const noexcept { return seq_; }
  const EventRing& ring() const noexcept { return ring_; }

  State state() const;
  void restore(const State& state);

 private:
  Frame reply(std::uint8_t cmd, Status status, ByteView body = {}, std::uint8_t flags = 0) const;
  bool authorized(ByteView payload) const;
  std::vector<Frame> handle(const Frame& request);

  std::uint8_t addr_;
  Password password_;
  BaudClass baud_ = BaudClass::B9600;
  rf::World& world_;
  rf::ReaderId reader_;
  EventRing ring_;
  std::uint32_t seq_ = 0;
};

}  // namespace rfidtrace::net
