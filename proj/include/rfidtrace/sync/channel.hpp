#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "rfidtrace/sync/wire.hpp"

namespace rfidtrace::sync {

/// Bidirectional byte stream to or from a device. Failures (peer gone, cut,
/// timeout) throw DeviceUnreachable.
class ByteChannel {
 public:
  virtual ~ByteChannel() = default;
  virtual void write(ByteView data) = 0;
  /// Blocks until at least one byte is available; returns how many were read.
  virtual std::size_t read(std::uint8_t* out, std::size_t max, std::chrono::milliseconds timeout) = 0;
  virtual void close() = 0;
  /// False once the stream is known to be broken.
  virtual bool alive() const { return true; }

  std::uint64_t bytes_written() const noexcept { return written_; }
  std::uint64_t bytes_read() const noexcept { return read_; }

 protected:
  std::atomic<std::uint64_t> written_{0};
  std::atomic<std::uint64_t> read_{0};
};

void write_message(ByteChannel& ch, const Message& m);
/// Throws DeviceUnreachable when the stream ends or stalls, Protocol on a bad
/// length prefix. `raw`, if given, receives the encoded bytes.
Message read_message(ByteChannel& ch, std::chrono::milliseconds timeout, Bytes* raw = nullptr);

/// In-process duplex pipe with fault injection. Both ends share one state and
/// stay valid after the PipeLink is gone.
class PipeLink {
 public:
  PipeLink();

  std::unique_ptr<ByteChannel> end_a();
  std::unique_ptr<ByteChannel> end_b();

  /// Breaks the link once `total` bytes (both directions) have been written.
  /// Bytes past the cut are lost; bytes before it are still delivered.
  void cut_after(std::uint64_t total);
  void cut_now();
  std::uint64_t bytes_transferred() const;

  struct State;

 private:
  std::shared_ptr<State> state_;
};

/// Byte stream over a connected socket; owns the descriptor.
class SocketChannel : public ByteChannel {
 public:
  explicit SocketChannel(int fd);
  ~SocketChannel() override;
  SocketChannel(const SocketChannel&) = delete;
  SocketChannel& operator=(const SocketChannel&) = delete;

  void write(ByteView data) override;
  std::size_t read(std::uint8_t* out, std::size_t max, std::chrono::milliseconds timeout) override;
  void close() override;
  bool alive() const override;

 private:
  std::atomic<int> fd_;
};

/// "host:port"; throws DeviceUnreachable.
std::unique_ptr<ByteChannel> connect_tcp(const std::string& endpoint, std::chrono::milliseconds timeout);

/// Listening TCP socket; port 0 picks a free one.
class TcpListener {
 public:
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  /// Blocks; returns nullptr after close().
  std::unique_ptr<ByteChannel> accept();
  void close();

 private:
  std::atomic<int> fd_;
  std::uint16_t port_ = 0;
};

}  // namespace rfidtrace::sync
