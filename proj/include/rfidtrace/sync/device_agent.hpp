#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "rfidtrace/sync/channel.hpp"
#include "rfidtrace/sync/device_store.hpp"

namespace rfidtrace::sync {

/// Device side of the sync protocol. Each request is applied only after it
/// has been received whole.
class DeviceAgent {
 public:
  explicit DeviceAgent(CompactStore& store, std::chrono::milliseconds idle_timeout = std::chrono::hours(1));

  /// Serves one connection until the peer goes away.
  void serve(ByteChannel& channel);

  Message handle(const Message& request);

 private:
  Message handle_inner(const Message& request);

  CompactStore& store_;
  std::chrono::milliseconds idle_timeout_;
  SessionDigest digest_;
  bool in_session_ = false;
};

/// A device reachable over in-process pipes: every connection gets a fresh
/// pipe and an agent thread.
class InProcessDevice {
 public:
  explicit InProcessDevice(CompactStore& store);
  ~InProcessDevice();
  InProcessDevice(const InProcessDevice&) = delete;
  InProcessDevice& operator=(const InProcessDevice&) = delete;

  std::function<std::unique_ptr<ByteChannel>()> connector();

  /// Cuts the next connection once it has carried `total` bytes.
  void cut_next_after(std::optional<std::uint64_t> total);
  /// Drops the current connection and waits for every agent thread.
  void join();
  /// The most recent connection's pipe.
  std::shared_ptr<PipeLink> last_pipe() const;

 private:
  CompactStore& store_;
  mutable std::mutex mutex_;
  std::optional<std::uint64_t> cut_;
  std::shared_ptr<PipeLink> last_;
  std::vector<std::thread> threads_;
};

}  // namespace rfidtrace::sync
