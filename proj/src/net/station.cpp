#include "rfidtrace/net/station.hpp"

#include <algorithm>

namespace rfidtrace::net {
namespace {

Status status_for(rf::Errc code) {
  switch (code) {
    case rf::Errc::TagNotFound: return Status::TagNotFound;
    case rf::Errc::BlockOutOfRange: return Status::BlockOutOfRange;
    case rf::Errc::BlockLocked: return Status::BlockLocked;
    default: return Status::BadRequest;
  }
}

rf::Uid uid_at(ByteView payload, std::size_t offset) {
  rf::Uid uid;
  std::copy_n(payload.begin() + static_cast<std::ptrdiff_t>(offset), 8, uid.bytes.begin());
  return uid;
}

}  // namespace

bool passwords_equal(const Password& a, const Password& b) noexcept {
  volatile std::uint8_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = diff | static_cast<std::uint8_t>(a[i] ^ b[i]);
  return diff == 0;
}

Password password_from_string(std::string_view text) {
  if (text.size() != 4) throw Error(Errc::BadRequest, "station passwords are exactly 4 bytes");
  Password pw;
  std::copy(text.begin(), text.end(), pw.begin());
  return pw;
}

Station::Station(std::uint8_t addr, Password password, rf::World& world, rf::ReaderId reader)
    : addr_(addr), password_(password), world_(world), reader_(reader) {
  if (addr > kMaxStationAddress) throw Error(Errc::BadAddress, std::to_string(addr));
}

void Station::record(EventKind kind, std::optional<rf::Uid> uid) {
  auto outcome = ring_.push(EventRecord{++seq_, addr_, kind, uid, world_.now_us()});
  if (outcome.crossed_warning_threshold) {
    ring_.push(EventRecord{++seq_, addr_, EventKind::BufferOverrunWarning, std::nullopt,
                           world_.now_us()});
  }
}

void Station::on_field_event(const rf::FieldEvent& event) {
  if (event.reader != reader_) return;
  record(event.kind == rf::FieldEvent::Kind::Enter ? EventKind::TagEnter : EventKind::TagLeave,
         event.uid);
}

Frame Station::reply(std::uint8_t cmd, Status status, ByteView body, std::uint8_t flags) const {
  Frame f{addr_, static_cast<std::uint8_t>(cmd | kResponseFlag), {}};
  f.payload.reserve(2 + body.size());
  f.payload.push_back(static_cast<std::uint8_t>(status));
  f.payload.push_back(flags);
  append(f.payload, body);
  return f;
}

bool Station::authorized(ByteView payload) const {
  if (payload.size() < 4) return false;
  Password given;
  std::copy_n(payload.begin(), 4, given.begin());
  return passwords_equal(given, password_);
}

std::vector<Frame> Station::dispatch(const Frame& request) {
  if (request.addr != addr_ && request.addr != kBroadcast) return {};
  auto responses = handle(request);
  if (request.addr == kBroadcast) return {};
  return responses;
}

std::vector<Frame> Station::handle(const Frame& request) {
  const auto cmd = request.cmd;
  const ByteView p = request.payload;
  auto one = [&](Status s, ByteView body = {}) { return std::vector<Frame>{reply(cmd, s, body)}; };

  if (request.is_response()) return one(Status::UnknownCommand);

  switch (static_cast<Command>(cmd)) {
    case Command::Ping: {
      Bytes body{addr_, kFirmwareMajor, kFirmwareMinor};
      put_le(body, static_cast<std::uint16_t>(ring_.size()));
      put_le(body, seq_);
      return one(Status::Ok, body);
    }
    case Command::SetAddr: {
      if (p.size() != 5 || p[4] > kMaxStationAddress) return one(Status::BadRequest);
      if (!authorized(p)) return one(Status::AuthFailed);
      // A broadcast address change would collapse every station onto one address.
      if (request.addr == kBroadcast) return one(Status::BadRequest);
      auto response = one(Status::Ok);
      addr_ = p[4];
      record(EventKind::ConfigChange);
      return response;
    }
    case Command::SetBaud: {
      if (p.size() != 5 || p[4] > kMaxBaudClass) return one(Status::BadRequest);
      if (!authorized(p)) return one(Status::AuthFailed);
      baud_ = static_cast<BaudClass>(p[4]);
      record(EventKind::ConfigChange);
      return one(Status::Ok);
    }
    case Command::SetPassword: {
      if (p.size() != 8) return one(Status::BadRequest);
      if (!authorized(p)) return one(Status::AuthFailed);
      std::copy_n(p.begin() + 4, 4, password_.begin());
      record(EventKind::ConfigChange);
      return one(Status::Ok);
    }
    case Command::Inventory: {
      if (!p.empty()) return one(Status::BadRequest);
      const auto result = world_.inventory(reader_);
      std::vector<Frame> frames;
      std::size_t i = 0;
      do {
        const auto n = std::min(kUidsPerFrame, result.uids.size() - i);
        Bytes body{static_cast<std::uint8_t>(n)};
        for (std::size_t k = 0; k < n; ++k) {
          const auto& uid = result.uids[i + k];
          body.insert(body.end(), uid.bytes.begin(), uid.bytes.end());
        }
        i += n;
        std::uint8_t flags = result.truncated ? kFlagTruncated : 0;
        if (i < result.uids.size()) flags |= kFlagMore;
        frames.push_back(reply(cmd, Status::Ok, body, flags));
      } while (i < result.uids.size());
      return frames;
    }
    case Command::ReadTag: {
      if (p.size() != 10 || p[9] == 0) return one(Status::BadRequest);
      const auto uid = uid_at(p, 0);
      const auto* tag = world_.find_tag(uid);
      if (tag == nullptr || world_.reader_of(uid) != reader_) return one(Status::TagNotFound);
      if (static_cast<std::size_t>(p[9]) * tag->block_size() > kMaxReadBytes) {
        return one(Status::BadRequest);
      }
      try {
        const auto blocks = world_.read_blocks(reader_, uid, p[8], p[9]);
        Bytes body{static_cast<std::uint8_t>(tag->block_size()), p[9]};
        for (const auto& b : blocks) append(body, b);
        return one(Status::Ok, body);
      } catch (const rf::Error& e) {
        return one(status_for(e.code()));
      }
    }
    case Command::WriteTag: {
      if (p.size() < 10) return one(Status::BadRequest);
      const auto uid = uid_at(p, 0);
      const auto* tag = world_.find_tag(uid);
      if (tag == nullptr || world_.reader_of(uid) != reader_) return one(Status::TagNotFound);
      const auto data = p.subspan(9);
      const auto bs = tag->block_size();
      if (data.size() % bs != 0) return one(Status::BadRequest);
      std::vector<Bytes> blocks;
      for (std::size_t off = 0; off < data.size(); off += bs) {
        blocks.emplace_back(data.begin() + static_cast<std::ptrdiff_t>(off),
                            data.begin() + static_cast<std::ptrdiff_t>(off + bs));
      }
      try {
        world_.write_blocks(reader_, uid, p[8], blocks);
        return one(Status::Ok);
      } catch (const rf::Error& e) {
        return one(status_for(e.code()));
      }
    }
    case Command::GetEvents: {
      if (p.size() != 4) return one(Status::BadRequest);
      const auto after = get_le<std::uint32_t>(p, 0);
      ring_.acknowledge(after);
      auto batch = ring_.read(after, kEventsPerFrame + 1);
      const bool more = batch.size() > kEventsPerFrame;
      if (more) batch.pop_back();
      Bytes body{static_cast<std::uint8_t>(batch.size())};
      for (const auto& e : batch) encode_event(body, e);
      return std::vector<Frame>{reply(cmd, Status::Ok, body, more ? kFlagPending : 0)};
    }
    case Command::ClearEvents: {
      if (p.size() != 4) return one(Status::BadRequest);
      if (!authorized(p)) return one(Status::AuthFailed);
      ring_.clear();
      return one(Status::Ok);
    }
  }
  return one(Status::UnknownCommand);
}

Station::State Station::state() const {
  State s;
  s.addr = addr_;
  s.password = password_;
  s.baud = baud_;
  s.last_seq = seq_;
  s.events = ring_.read(0);
  s.warning_armed = ring_.warning_armed();
  return s;
}

void Station::restore(const State& state) {
  addr_ = state.addr;
  password_ = state.password;
  baud_ = state.baud;
  seq_ = state.last_seq;
  ring_.clear();
  for (const auto& e : state.events) ring_.push(e);
  ring_.set_warning_armed(state.warning_armed);
}

}  // namespace rfidtrace::net
