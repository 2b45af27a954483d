#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <string>

#include "rfidtrace/sync/channel.hpp"

namespace rfidtrace::sync {

enum class LinkState { Disconnected, Connected, Faulted };

std::string_view to_string(LinkState s);

/// Central side of one device connection.
class DeviceLink {
 public:
  using Connector = std::function<std::unique_ptr<ByteChannel>()>;

  DeviceLink(std::string device_id, Connector connector,
             std::chrono::milliseconds timeout = std::chrono::seconds(5));
  ~DeviceLink();
  DeviceLink(const DeviceLink&) = delete;
  DeviceLink& operator=(const DeviceLink&) = delete;

  /// No-op when already connected. Throws DeviceUnreachable, or Rejected when
  /// the peer is a different device.
  void connect();
  void disconnect();
  /// Notices a dropped transport without an exchange.
  LinkState state() const;
  const std::string& device_id() const noexcept { return device_id_; }

  /// One request/response exchange. Throws NotConnected when disconnected and
  /// DeviceUnreachable when faulted; a transport failure moves the link to
  /// FAULTED and throws DeviceUnreachable.
  Message exchange(const Message& request);

  /// Byte-identical transfers, checked by digest on the receiving side.
  void copy_to_device(const std::string& path, ByteView data);
  /// Throws NotFound.
  Bytes copy_from_device(const std::string& path);
  Status delete_file(const std::string& path);
  Status make_dir(const std::string& path);
  Status remove_dir(const std::string& path);
  StatInfo stat(const std::string& path);

  /// Transport byte counters over the link's lifetime.
  std::uint64_t bytes_sent() const;
  std::uint64_t bytes_received() const;

  /// One sync session per device: throws Busy when one is running.
  std::unique_lock<std::mutex> lock_session();

 private:
  Message exchange_locked(const Message& request);
  void drop_channel_locked() const;
  Status path_op(MsgType type, const std::string& path);

  std::string device_id_;
  Connector connector_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex io_mutex_;
  std::mutex session_mutex_;
  void refresh_locked() const;

  mutable std::unique_ptr<ByteChannel> channel_;
  mutable LinkState state_ = LinkState::Disconnected;
  mutable std::uint64_t sent_before_ = 0;
  mutable std::uint64_t received_before_ = 0;
};

/// Maps a non-Ok status to the matching error.
[[noreturn]] void throw_status(Status s, const std::string& text);

}  // namespace rfidtrace::sync
