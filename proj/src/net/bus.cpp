#include "rfidtrace/net/bus.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "rfidtrace/common/hex.hpp"

namespace rfidtrace::net {

std::string format_transcript_line(const TranscriptEntry& entry) {
  char stamp[32];
  std::snprintf(stamp, sizeof stamp, "%012llu",
                static_cast<unsigned long long>(entry.timestamp_us));
  std::string line = stamp;
  line += entry.direction == Direction::MasterToStation ? " M>S " : " S>M ";
  line += to_spaced_hex(entry.bytes);
  return line;
}

InProcessBus::InProcessBus(Clock clock, std::size_t transcript_limit)
    : clock_(std::move(clock)), transcript_limit_(transcript_limit) {}

void InProcessBus::attach(Station& station) {
  std::lock_guard lock(mutex_);
  for (const auto* s : stations_) {
    if (s->addr() == station.addr()) throw Error(Errc::DuplicateAddress, std::to_string(s->addr()));
  }
  stations_.push_back(&station);
}

bool InProcessBus::detach(std::uint8_t addr) {
  std::lock_guard lock(mutex_);
  auto it = std::find_if(stations_.begin(), stations_.end(),
                         [&](const Station* s) { return s->addr() == addr; });
  if (it == stations_.end()) return false;
  stations_.erase(it);
  return true;
}

bool InProcessBus::attached(std::uint8_t addr) const {
  std::lock_guard lock(mutex_);
  return std::any_of(stations_.begin(), stations_.end(),
                     [&](const Station* s) { return s->addr() == addr; });
}

void InProcessBus::log(Direction dir, const Bytes& bytes) {
  TranscriptEntry entry{clock_ ? clock_() : 0, dir, bytes};
  if (sink_ != nullptr) *sink_ << format_transcript_line(entry) << '\n';
  transcript_.push_back(std::move(entry));
  while (transcript_.size() > transcript_limit_) transcript_.pop_front();
}

std::vector<Frame> InProcessBus::transact(const Frame& request) {
  std::lock_guard lock(mutex_);
  const auto wire = frame_encode(request);
  log(Direction::MasterToStation, wire);
  const auto delivered = frame_decode(wire);

  std::vector<Frame> responses;
  bool answered = false;
  for (auto* station : stations_) {
    if (delivered.addr != kBroadcast && station->addr() != delivered.addr) continue;
    answered = true;
    for (const auto& frame : station->dispatch(delivered)) {
      const auto back = frame_encode(frame);
      log(Direction::StationToMaster, back);
      responses.push_back(frame_decode(back));
    }
  }
  if (!answered && delivered.addr != kBroadcast) {
    throw Error(Errc::StationTimeout, "no station at address " + std::to_string(delivered.addr));
  }
  return responses;
}

std::vector<TranscriptEntry> InProcessBus::transcript() const {
  std::lock_guard lock(mutex_);
  return {transcript_.begin(), transcript_.end()};
}

std::string InProcessBus::transcript_text() const {
  std::lock_guard lock(mutex_);
  std::string out;
  for (const auto& e : transcript_) {
    out += format_transcript_line(e);
    out += '\n';
  }
  return out;
}

void InProcessBus::set_transcript_sink(std::ostream* sink) {
  std::lock_guard lock(mutex_);
  sink_ = sink;
}

}  // namespace rfidtrace::net
