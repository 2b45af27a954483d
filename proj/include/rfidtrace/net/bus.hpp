#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <string>
#include <vector>

#include "rfidtrace/net/frame.hpp"
#include "rfidtrace/net/station.hpp"

namespace rfidtrace::net {

/// Carries one command/response exchange at a time.
class Transport {
 public:
  virtual ~Transport() = default;
  /// Sends `request` and returns every response frame. Broadcasts return no
  /// frames. Throws StationTimeout when a unicast goes unanswered.
  virtual std::vector<Frame> transact(const Frame& request) = 0;
};

enum class Direction { MasterToStation, StationToMaster };

struct TranscriptEntry {
  std::uint64_t timestamp_us = 0;
  Direction direction = Direction::MasterToStation;
  Bytes bytes;
};

/// Transcript line: "<timestamp_us, 12 digits> <M>S|S>M> <hex pairs>".
std::string format_transcript_line(const TranscriptEntry& entry);

/// Simulated multi-drop bus. Every exchange runs under one lock, so the
/// transcript never interleaves two command/response exchanges. Frames travel
/// as encoded bytes and are decoded again on the far side.
class InProcessBus : public Transport {
 public:
  using Clock = std::function<std::uint64_t()>;

  explicit InProcessBus(Clock clock = {}, std::size_t transcript_limit = 10000);

  void attach(Station& station);
  /// Detaches whichever station currently answers at `addr`.
  bool detach(std::uint8_t addr);
  bool attached(std::uint8_t addr) const;

  std::vector<Frame> transact(const Frame& request) override;

  std::vector<TranscriptEntry> transcript() const;
  std::string transcript_text() const;
  /// Mirrors every transcript line to `sink` (may be null).
  void set_transcript_sink(std::ostream* sink);

 private:
  void log(Direction dir, const Bytes& bytes);

  mutable std::mutex mutex_;
  Clock clock_;
  std::size_t transcript_limit_;
  std::vector<Station*> stations_;
  std::deque<TranscriptEntry> transcript_;
  std::ostream* sink_ = nullptr;
};

}  // namespace rfidtrace::net
