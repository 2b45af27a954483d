#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "rfidtrace/common/bytes.hpp"
#include "rfidtrace/common/error.hpp"

namespace rfidtrace::net {

enum class Errc {
  CrcMismatch,
  BadAddress,
  Truncated,
  Malformed,
  PayloadTooLarge,
  StationTimeout,
  AuthFailed,
  UnknownCommand,
  BadRequest,
  TagNotFound,
  BlockOutOfRange,
  BlockLocked,
  DuplicateAddress,
  TooManyStations,
  UnknownStation,
  BadResponse,
  TransportClosed,
};

std::string_view to_string(Errc code);
using Error = BasicError<Errc>;

inline constexpr std::uint8_t kStartOfFrame = 0xAA;
inline constexpr std::uint8_t kBroadcast = 0xFF;
inline constexpr std::uint8_t kMaxStationAddress = 29;
inline constexpr std::size_t kMaxStations = 30;
inline constexpr std::size_t kMaxPayload = 200;
inline constexpr std::size_t kFrameOverhead = 6;  // sof addr cmd len crc:2
inline constexpr std::uint8_t kResponseFlag = 0x80;

enum class Command : std::uint8_t {
  Ping = 0x01,
  SetAddr = 0x02,
  SetBaud = 0x03,
  SetPassword = 0x04,
  Inventory = 0x05,
  ReadTag = 0x06,
  WriteTag = 0x07,
  GetEvents = 0x08,
  ClearEvents = 0x09,
};

constexpr std::uint8_t code(Command c) noexcept { return static_cast<std::uint8_t>(c); }
constexpr std::uint8_t response_code(Command c) noexcept { return code(c) | kResponseFlag; }

/// Station addresses 0..29 and broadcast 0xFF.
constexpr bool valid_address(std::uint8_t addr) noexcept {
  return addr <= kMaxStationAddress || addr == kBroadcast;
}

struct Frame {
  std::uint8_t addr = 0;
  std::uint8_t cmd = 0;
  Bytes payload;

  bool is_response() const noexcept { return (cmd & kResponseFlag) != 0; }
  friend bool operator==(const Frame&, const Frame&) = default;
};

/// [0xAA][addr][cmd][len][payload...][crc16 LE], CRC-16/CCITT-FALSE over
/// addr..payload. Throws BadAddress or PayloadTooLarge.
Bytes frame_encode(std::uint8_t addr, std::uint8_t cmd, ByteView payload = {});
Bytes frame_encode(const Frame& frame);

/// Decodes exactly one frame occupying all of `bytes`.
Frame frame_decode(ByteView bytes);

/// Incremental decoder for a byte stream. Bytes that cannot start a valid
/// frame are skipped one at a time, so the decoder resynchronizes on the next
/// 0xAA that begins a frame whose CRC checks out.
class FrameDecoder {
 public:
  void feed(ByteView bytes);
  /// Marks end of stream: incomplete candidates are discarded instead of
  /// waited on.
  void finish() noexcept { finished_ = true; }
  std::optional<Frame> next();

  std::size_t buffered() const noexcept { return buffer_.size() - pos_; }
  std::size_t discarded() const noexcept { return discarded_; }

 private:
  void skip(std::size_t n);

  Bytes buffer_;
  std::size_t pos_ = 0;
  std::size_t discarded_ = 0;
  bool finished_ = false;
};

/// Decodes every frame in a complete byte string.
std::vector<Frame> decode_stream(ByteView bytes);

}  // namespace rfidtrace::net
