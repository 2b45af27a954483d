#include "rfidtrace/net/master.hpp"

#include <algorithm>

namespace rfidtrace::net {
namespace {

Errc errc_for(Status status) {
  switch (status) {
    case Status::AuthFailed: return Errc::AuthFailed;
    case Status::UnknownCommand: return Errc::UnknownCommand;
    case Status::TagNotFound: return Errc::TagNotFound;
    case Status::BlockOutOfRange: return Errc::BlockOutOfRange;
    case Status::BlockLocked: return Errc::BlockLocked;
    default: return Errc::BadRequest;
  }
}

}  // namespace

std::size_t PollResult::event_count() const {
  std::size_t n = 0;
  for (const auto& b : batches) n += b.events.size();
  return n;
}

Master::Master(Transport& transport, NetworkConfig config)
    : transport_(transport), config_(config) {}

void Master::register_station(std::uint8_t addr, Password password, std::uint32_t acked_seq) {
  if (addr > kMaxStationAddress) throw Error(Errc::BadAddress, std::to_string(addr));
  if (roster_.contains(addr)) throw Error(Errc::DuplicateAddress, std::to_string(addr));
  if (roster_.size() >= config_.max_stations) {
    throw Error(Errc::TooManyStations,
                "a master serves at most " + std::to_string(config_.max_stations) + " stations");
  }
  roster_.emplace(addr, Entry{password, acked_seq});
}

void Master::unregister_station(std::uint8_t addr) {
  if (roster_.erase(addr) == 0) throw Error(Errc::UnknownStation, std::to_string(addr));
}

std::vector<std::uint8_t> Master::roster() const {
  std::vector<std::uint8_t> out;
  for (const auto& [addr, _] : roster_) out.push_back(addr);
  return out;
}

Master::Entry& Master::entry(std::uint8_t addr) {
  auto it = roster_.find(addr);
  if (it == roster_.end()) throw Error(Errc::UnknownStation, std::to_string(addr));
  return it->second;
}

std::uint32_t Master::acked_seq(std::uint8_t addr) const {
  auto it = roster_.find(addr);
  if (it == roster_.end()) throw Error(Errc::UnknownStation, std::to_string(addr));
  return it->second.acked_seq;
}

std::vector<Frame> Master::exchange(std::uint8_t addr, Command cmd, ByteView payload) {
  auto frames = transport_.transact(Frame{addr, code(cmd), Bytes(payload.begin(), payload.end())});
  if (frames.empty()) throw Error(Errc::BadResponse, "no response frames");
  for (const auto& f : frames) {
    if (f.cmd != response_code(cmd) || f.payload.size() < 2) {
      throw Error(Errc::BadResponse, "unexpected response to command " + std::to_string(code(cmd)));
    }
    const auto status = static_cast<Status>(f.payload[0]);
    if (status != Status::Ok) {
      throw Error(errc_for(status), "station " + std::to_string(addr));
    }
  }
  return frames;
}

Bytes Master::with_password(std::uint8_t addr, ByteView rest) {
  const auto& pw = entry(addr).password;
  Bytes payload(pw.begin(), pw.end());
  append(payload, rest);
  return payload;
}

PollResult Master::poll_cycle() {
  PollResult result;
  for (auto& [addr, e] : roster_) {
    StationBatch batch{addr, {}};
    try {
      bool more = true;
      while (more) {
        Bytes req;
        put_le(req, e.acked_seq);
        auto frames = exchange(addr, Command::GetEvents, req);
        const auto& p = frames.front().payload;
        if (p.size() < 3 || p.size() != 3 + p[2] * kEventWireSize) {
          throw Error(Errc::BadResponse, "malformed event batch");
        }
        more = (p[1] & kFlagPending) != 0;
        for (std::size_t i = 0; i < p[2]; ++i) {
          auto ev = decode_event(p, 3 + i * kEventWireSize, addr);
          if (ev.seq <= e.acked_seq) continue;
          if (ev.seq != e.acked_seq + 1) result.gaps.push_back({addr, e.acked_seq + 1, ev.seq});
          e.acked_seq = ev.seq;
          batch.events.push_back(ev);
        }
        if (p[2] == 0) more = false;
      }
      result.responsive.push_back(addr);
    } catch (const Error& err) {
      if (err.code() != Errc::StationTimeout) throw;
      result.timeouts.push_back(addr);
    }
    if (!batch.events.empty()) result.batches.push_back(std::move(batch));
  }
  return result;
}

PingInfo Master::ping(std::uint8_t addr) {
  const auto frames = exchange(addr, Command::Ping, {});
  const auto& p = frames.front().payload;
  if (p.size() != 11) throw Error(Errc::BadResponse, "malformed ping response");
  return PingInfo{p[2], p[3], p[4], get_le<std::uint16_t>(p, 5), get_le<std::uint32_t>(p, 7)};
}

InventoryReply Master::inventory(std::uint8_t addr) {
  InventoryReply reply;
  for (const auto& f : exchange(addr, Command::Inventory, {})) {
    const auto& p = f.payload;
    if (p.size() < 3 || p.size() != 3 + std::size_t{p[2]} * 8) {
      throw Error(Errc::BadResponse, "malformed inventory response");
    }
    reply.truncated = reply.truncated || (p[1] & kFlagTruncated) != 0;
    for (std::size_t i = 0; i < p[2]; ++i) {
      rf::Uid uid;
      std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(3 + i * 8), 8, uid.bytes.begin());
      reply.uids.push_back(uid);
    }
  }
  return reply;
}

BlockRead Master::read_tag(std::uint8_t addr, const rf::Uid& uid, std::size_t first,
                           std::size_t count) {
  BlockRead out;
  std::size_t done = 0;
  while (done < count) {
    // One block first to learn the block size, then as many as fit a frame.
    std::size_t chunk = out.block_size == 0 ? 1 : std::min(count - done, kMaxReadBytes / out.block_size);
    if (first + done > 0xFF || chunk > 0xFF) throw Error(Errc::BadRequest, "block index beyond 255");
    Bytes req(uid.bytes.begin(), uid.bytes.end());
    req.push_back(static_cast<std::uint8_t>(first + done));
    req.push_back(static_cast<std::uint8_t>(chunk));
    const auto frames = exchange(addr, Command::ReadTag, req);
    const auto& p = frames.front().payload;
    if (p.size() < 4 || p.size() != 4 + std::size_t{p[2]} * p[3] || p[3] != chunk) {
      throw Error(Errc::BadResponse, "malformed read response");
    }
    out.block_size = p[2];
    out.data.insert(out.data.end(), p.begin() + 4, p.end());
    done += chunk;
  }
  return out;
}

void Master::write_tag(std::uint8_t addr, const rf::Uid& uid, std::size_t first, ByteView data,
                       std::size_t block_size) {
  if (block_size == 0 || data.size() % block_size != 0) {
    throw Error(Errc::BadRequest, "write data must be whole blocks");
  }
  const auto per_frame = (kMaxWriteBytes / block_size) * block_size;
  std::size_t off = 0;
  while (off < data.size()) {
    const auto n = std::min(per_frame, data.size() - off);
    const auto block = first + off / block_size;
    if (block > 0xFF) throw Error(Errc::BadRequest, "block index beyond 255");
    Bytes req(uid.bytes.begin(), uid.bytes.end());
    req.push_back(static_cast<std::uint8_t>(block));
    append(req, data.subspan(off, n));
    exchange(addr, Command::WriteTag, req);
    off += n;
  }
}

void Master::set_address(std::uint8_t addr, std::uint8_t new_addr) {
  if (new_addr > kMaxStationAddress) throw Error(Errc::BadAddress, std::to_string(new_addr));
  if (new_addr != addr && roster_.contains(new_addr)) {
    throw Error(Errc::DuplicateAddress, std::to_string(new_addr));
  }
  exchange(addr, Command::SetAddr, with_password(addr, Bytes{new_addr}));
  auto e = entry(addr);
  roster_.erase(addr);
  roster_.emplace(new_addr, e);
}

void Master::set_baud(std::uint8_t addr, BaudClass baud) {
  exchange(addr, Command::SetBaud, with_password(addr, Bytes{static_cast<std::uint8_t>(baud)}));
}

void Master::set_password(std::uint8_t addr, Password new_password) {
  exchange(addr, Command::SetPassword, with_password(addr, new_password));
  entry(addr).password = new_password;
}

void Master::clear_events(std::uint8_t addr) {
  exchange(addr, Command::ClearEvents, with_password(addr, {}));
}

void Master::broadcast(Command cmd, ByteView payload) {
  transport_.transact(Frame{kBroadcast, code(cmd), Bytes(payload.begin(), payload.end())});
}

}  // namespace rfidtrace::net
