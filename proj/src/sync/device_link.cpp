#include "rfidtrace/sync/device_link.hpp"

namespace rfidtrace::sync {

std::string_view to_string(LinkState s) {
  switch (s) {
    case LinkState::Disconnected: return "DISCONNECTED";
    case LinkState::Connected: return "CONNECTED";
    case LinkState::Faulted: return "FAULTED";
  }
  return "UNKNOWN";
}

void throw_status(Status s, const std::string& text) {
  switch (s) {
    case Status::NotFound: throw Error(Errc::NotFound, text);
    case Status::QuotaExceeded: throw Error(Errc::QuotaExceeded, text);
    case Status::Protocol: throw Error(Errc::Protocol, text);
    case Status::Io: throw Error(Errc::Io, text);
    default: throw Error(Errc::Rejected, text);
  }
}

DeviceLink::DeviceLink(std::string device_id, Connector connector, std::chrono::milliseconds timeout)
    : device_id_(std::move(device_id)), connector_(std::move(connector)), timeout_(timeout) {}

DeviceLink::~DeviceLink() { disconnect(); }

LinkState DeviceLink::state() const {
  std::lock_guard lock(io_mutex_);
  refresh_locked();
  return state_;
}

void DeviceLink::refresh_locked() const {
  if (state_ == LinkState::Connected && !channel_->alive()) {
    drop_channel_locked();
    state_ = LinkState::Faulted;
  }
}

void DeviceLink::drop_channel_locked() const {
  if (!channel_) return;
  channel_->close();
  sent_before_ += channel_->bytes_written();
  received_before_ += channel_->bytes_read();
  channel_.reset();
}

void DeviceLink::connect() {
  std::lock_guard lock(io_mutex_);
  if (state_ == LinkState::Connected) return;
  drop_channel_locked();
  try {
    channel_ = connector_();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::DeviceUnreachable, device_id_ + ": " + e.what());
  }
  if (!channel_) throw Error(Errc::DeviceUnreachable, device_id_ + ": no channel");
  Ack ack;
  try {
    write_message(*channel_, BodyWriter().u16(kSyncVersion).str8(device_id_).done(MsgType::Hello));
    ack = decode_ack(read_message(*channel_, timeout_));
  } catch (const Error& e) {
    drop_channel_locked();
    throw Error(Errc::DeviceUnreachable, device_id_ + ": " + e.detail());
  }
  if (ack.status != Status::Ok) {
    drop_channel_locked();
    throw Error(Errc::Rejected, device_id_ + ": " + ack.text);
  }
  state_ = LinkState::Connected;
}

void DeviceLink::disconnect() {
  std::lock_guard lock(io_mutex_);
  drop_channel_locked();
  state_ = LinkState::Disconnected;
}

Message DeviceLink::exchange(const Message& request) {
  std::lock_guard lock(io_mutex_);
  return exchange_locked(request);
}

Message DeviceLink::exchange_locked(const Message& request) {
  refresh_locked();
  if (state_ == LinkState::Disconnected) throw Error(Errc::NotConnected, device_id_ + " is not connected");
  if (state_ == LinkState::Faulted) throw Error(Errc::DeviceUnreachable, device_id_ + ": link faulted");
  try {
    write_message(*channel_, request);
    return read_message(*channel_, timeout_);
  } catch (const Error& e) {
    // Any failure here leaves the stream position unknown.
    drop_channel_locked();
    state_ = LinkState::Faulted;
    throw Error(Errc::DeviceUnreachable, device_id_ + ": " + e.detail());
  }
}

void DeviceLink::copy_to_device(const std::string& path, ByteView data) {
  const auto reply =
      exchange(BodyWriter().str16(path).digest(blake2b(data)).blob(data).done(MsgType::FilePut));
  const auto ack = decode_ack(reply);
  if (ack.status != Status::Ok) throw_status(ack.status, ack.text);
}

Bytes DeviceLink::copy_from_device(const std::string& path) {
  const auto reply = exchange(BodyWriter().str16(path).done(MsgType::FileGet));
  if (reply.type == MsgType::Ack) {
    const auto ack = decode_ack(reply);
    throw_status(ack.status == Status::Ok ? Status::Protocol : ack.status, ack.text);
  }
  if (reply.type != MsgType::Data) throw Error(Errc::Protocol, "expected DATA");
  BodyReader r(reply.body);
  const auto digest = r.digest();
  auto data = r.blob();
  r.finish();
  if (blake2b(data) != digest) throw Error(Errc::Protocol, "file digest mismatch for " + path);
  return data;
}

Status DeviceLink::path_op(MsgType type, const std::string& path) {
  const auto ack = decode_ack(exchange(BodyWriter().str16(path).done(type)));
  switch (ack.status) {
    case Status::Ok:
    case Status::NotFound:
    case Status::AlreadyExists:
      return ack.status;
    default:
      throw_status(ack.status, ack.text);
  }
}

Status DeviceLink::delete_file(const std::string& path) { return path_op(MsgType::FileDelete, path); }
Status DeviceLink::make_dir(const std::string& path) { return path_op(MsgType::MakeDir, path); }
Status DeviceLink::remove_dir(const std::string& path) { return path_op(MsgType::RemoveDir, path); }

StatInfo DeviceLink::stat(const std::string& path) {
  const auto reply = exchange(BodyWriter().str16(path).done(MsgType::Stat));
  if (reply.type == MsgType::Ack) {
    const auto ack = decode_ack(reply);
    throw_status(ack.status == Status::Ok ? Status::Protocol : ack.status, ack.text);
  }
  if (reply.type != MsgType::StatInfo) throw Error(Errc::Protocol, "expected STAT_INFO");
  return decode_stat(reply.body);
}

std::uint64_t DeviceLink::bytes_sent() const {
  std::lock_guard lock(io_mutex_);
  return sent_before_ + (channel_ ? channel_->bytes_written() : 0);
}

std::uint64_t DeviceLink::bytes_received() const {
  std::lock_guard lock(io_mutex_);
  return received_before_ + (channel_ ? channel_->bytes_read() : 0);
}

std::unique_lock<std::mutex> DeviceLink::lock_session() {
  std::unique_lock lock(session_mutex_, std::try_to_lock);
  if (!lock.owns_lock()) throw Error(Errc::Busy, "a sync session with " + device_id_ + " is already running");
  return lock;
}

}  // namespace rfidtrace::sync
