#include "rfidtrace/net/frame.hpp"

#include <algorithm>

#include "rfidtrace/common/crc16.hpp"

namespace rfidtrace::net {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::CrcMismatch: return "CrcMismatch";
    case Errc::BadAddress: return "BadAddress";
    case Errc::Truncated: return "Truncated";
    case Errc::Malformed: return "Malformed";
    case Errc::PayloadTooLarge: return "PayloadTooLarge";
    case Errc::StationTimeout: return "StationTimeout";
    case Errc::AuthFailed: return "AuthFailed";
    case Errc::UnknownCommand: return "UnknownCommand";
    case Errc::BadRequest: return "BadRequest";
    case Errc::TagNotFound: return "TagNotFound";
    case Errc::BlockOutOfRange: return "BlockOutOfRange";
    case Errc::BlockLocked: return "BlockLocked";
    case Errc::DuplicateAddress: return "DuplicateAddress";
    case Errc::TooManyStations: return "TooManyStations";
    case Errc::UnknownStation: return "UnknownStation";
    case Errc::BadResponse: return "BadResponse";
    case Errc::TransportClosed: return "TransportClosed";
  }
  return "Unknown";
}

Bytes frame_encode(std::uint8_t addr, std::uint8_t cmd, ByteView payload) {
  if (!valid_address(addr)) throw Error(Errc::BadAddress, std::to_string(addr));
  if (payload.size() > kMaxPayload) throw Error(Errc::PayloadTooLarge, std::to_string(payload.size()));
  Bytes out;
  out.reserve(kFrameOverhead + payload.size());
  out.push_back(kStartOfFrame);
  out.push_back(addr);
  out.push_back(cmd);
  out.push_back(static_cast<std::uint8_t>(payload.size()));
  append(out, payload);
  put_le(out, crc16_ccitt_false(ByteView(out).subspan(1)));
  return out;
}

Bytes frame_encode(const Frame& frame) { return frame_encode(frame.addr, frame.cmd, frame.payload); }

Frame frame_decode(ByteView bytes) {
  if (bytes.size() < kFrameOverhead) throw Error(Errc::Truncated);
  if (bytes[0] != kStartOfFrame) throw Error(Errc::Malformed, "missing start of frame");
  const std::size_t len = bytes[3];
  if (len > kMaxPayload) throw Error(Errc::PayloadTooLarge, std::to_string(len));
  if (bytes.size() < kFrameOverhead + len) throw Error(Errc::Truncated);
  if (bytes.size() > kFrameOverhead + len) throw Error(Errc::Malformed, "trailing bytes");
  const auto covered = bytes.subspan(1, 3 + len);
  if (crc16_ccitt_false(covered) != get_le<std::uint16_t>(bytes, 4 + len)) {
    throw Error(Errc::CrcMismatch);
  }
  if (!valid_address(bytes[1])) throw Error(Errc::BadAddress, std::to_string(bytes[1]));
  return Frame{bytes[1], bytes[2], Bytes(bytes.begin() + 4, bytes.begin() + 4 + static_cast<std::ptrdiff_t>(len))};
}

void FrameDecoder::feed(ByteView bytes) {
  if (pos_ > 4096 && pos_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(pos_));
    pos_ = 0;
  }
  append(buffer_, bytes);
}

void FrameDecoder::skip(std::size_t n) {
  pos_ += n;
  discarded_ += n;
}

std::optional<Frame> FrameDecoder::next() {
  while (true) {
    auto start = std::find(buffer_.begin() + static_cast<std::ptrdiff_t>(pos_), buffer_.end(),
                           kStartOfFrame);
    skip(static_cast<std::size_t>(start - buffer_.begin()) - pos_);
    const auto avail = buffer_.size() - pos_;
    if (avail == 0) return std::nullopt;

    const ByteView view = ByteView(buffer_).subspan(pos_);
    if (avail < 4) {
      if (!finished_) return std::nullopt;
      skip(1);
      continue;
    }
    const std::size_t len = view[3];
    if (!valid_address(view[1]) || len > kMaxPayload) {
      skip(1);
      continue;
    }
    const auto need = kFrameOverhead + len;
    if (avail < need) {
      if (!finished_) return std::nullopt;
      skip(1);
      continue;
    }
    if (crc16_ccitt_false(view.subspan(1, 3 + len)) != get_le<std::uint16_t>(view, 4 + len)) {
      skip(1);
      continue;
    }
    Frame frame{view[1], view[2], Bytes(view.begin() + 4, view.begin() + 4 + static_cast<std::ptrdiff_t>(len))};
    pos_ += need;
    return frame;
  }
}

std::vector<Frame> decode_stream(ByteView bytes) {
  FrameDecoder decoder;
  decoder.feed(bytes);
  decoder.finish();
  std::vector<Frame> frames;
  while (auto f = decoder.next()) frames.push_back(std::move(*f));
  return frames;
}

}  // namespace rfidtrace::net
