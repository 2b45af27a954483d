#include "rfidtrace/net/stream_transport.hpp"

#include <poll.h>
#include <unistd.h>

#include <cerrno>

namespace rfidtrace::net {

void write_all(int fd, ByteView bytes) {
  std::size_t off = 0;
  while (off < bytes.size()) {
    auto n = ::write(fd, bytes.data() + off, bytes.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(Errc::TransportClosed, "write failed");
    off += static_cast<std::size_t>(n);
  }
}

StreamTransport::StreamTransport(int fd, std::chrono::milliseconds timeout)
    : fd_(fd), timeout_(timeout) {}

std::vector<Frame> StreamTransport::transact(const Frame& request) {
  write_all(fd_, frame_encode(request));
  if (request.addr == kBroadcast) return {};

  std::vector<Frame> responses;
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  std::uint8_t buf[512];
  while (true) {
    while (auto frame = decoder_.next()) {
      if (!frame->is_response() || frame->addr != request.addr) continue;
      const bool more = frame->payload.size() >= 2 && (frame->payload[1] & kFlagMore);
      responses.push_back(std::move(*frame));
      if (!more) return responses;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) break;
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) break;
    const auto n = ::read(fd_, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(Errc::TransportClosed, "stream closed");
    decoder_.feed(ByteView(buf, static_cast<std::size_t>(n)));
  }
  throw Error(Errc::StationTimeout, "no response from station " + std::to_string(request.addr));
}

StationHost::StationHost(int fd) : fd_(fd) {}

void StationHost::serve() {
  FrameDecoder decoder;
  std::uint8_t buf[512];
  while (true) {
    const auto n = ::read(fd_, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return;
    decoder.feed(ByteView(buf, static_cast<std::size_t>(n)));
    while (auto frame = decoder.next()) {
      for (auto* station : stations_) {
        for (const auto& reply : station->dispatch(*frame)) write_all(fd_, frame_encode(reply));
      }
    }
  }
}

}  // namespace rfidtrace::net
