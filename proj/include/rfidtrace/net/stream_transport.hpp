#pragma once

#include <chrono>
#include <vector>

#include "rfidtrace/net/bus.hpp"

namespace rfidtrace::net {

/// Master side of a byte-stream link (socket or pipe pair). Frames are
/// written as-is; responses are read until a frame without the "more" flag.
class StreamTransport : public Transport {
 public:
  /// Does not take ownership of `fd`.
  explicit StreamTransport(int fd, std::chrono::milliseconds timeout = std::chrono::milliseconds(500));

  std::vector<Frame> transact(const Frame& request) override;

 private:
  int fd_;
  std::chrono::milliseconds timeout_;
  FrameDecoder decoder_;
};

/// Station side of a byte-stream link: decodes incoming frames, dispatches
/// them to the attached stations and writes back their responses.
class StationHost {
 public:
  explicit StationHost(int fd);

  void attach(Station& station) { stations_.push_back(&station); }
  /// Serves until the peer closes the stream.
  void serve();

 private:
  int fd_;
  std::vector<Station*> stations_;
};

/// Writes all of `bytes`, retrying on partial writes. Throws TransportClosed.
void write_all(int fd, ByteView bytes);

}  // namespace rfidtrace::net
