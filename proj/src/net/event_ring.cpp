#include "rfidtrace/net/event_ring.hpp"

#include <algorithm>

namespace rfidtrace::net {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::TagEnter: return "TAG_ENTER";
    case EventKind::TagLeave: return "TAG_LEAVE";
    case EventKind::Alarm: return "ALARM";
    case EventKind::ConfigChange: return "CONFIG_CHANGE";
    case EventKind::BufferOverrunWarning: return "BUFFER_OVERRUN_WARNING";
  }
  return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (auto k : {EventKind::TagEnter, EventKind::TagLeave, EventKind::Alarm,
                 EventKind::ConfigChange, EventKind::BufferOverrunWarning}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void encode_event(Bytes& out, const EventRecord& event) {
  put_le(out, event.seq);
  out.push_back(static_cast<std::uint8_t>(event.kind));
  out.push_back(event.uid ? 1 : 0);
  if (event.uid) {
    out.insert(out.end(), event.uid->bytes.begin(), event.uid->bytes.end());
  } else {
    out.insert(out.end(), 8, 0);
  }
  put_le(out, event.sim_timestamp_us);
}

EventRecord decode_event(ByteView bytes, std::size_t offset, std::uint8_t station) {
  EventRecord e;
  e.seq = get_le<std::uint32_t>(bytes, offset);
  e.station = station;
  e.kind = static_cast<EventKind>(bytes[offset + 4]);
  if (bytes[offset + 5] & 1) {
    rf::Uid uid;
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(offset + 6), 8, uid.bytes.begin());
    e.uid = uid;
  }
  e.sim_timestamp_us = get_le<std::uint64_t>(bytes, offset + 14);
  return e;
}

EventRing::EventRing(std::size_t capacity) : capacity_(capacity) {}

EventRing::PushOutcome EventRing::push(const EventRecord& record) {
  PushOutcome outcome;
  if (records_.size() == capacity_) {
    records_.pop_front();
    outcome.evicted = true;
  }
  records_.push_back(record);
  if (armed_ && records_.size() >= kWarningThreshold) {
    armed_ = false;
    outcome.crossed_warning_threshold = true;
  }
  return outcome;
}

std::vector<EventRecord> EventRing::read(std::uint32_t after_seq, std::size_t limit) const {
  std::vector<EventRecord> out;
  for (const auto& r : records_) {
    if (out.size() == limit) break;
    if (r.seq > after_seq) out.push_back(r);
  }
  return out;
}

std::size_t EventRing::acknowledge(std::uint32_t through_seq) {
  std::size_t dropped = 0;
  while (!records_.empty() && records_.front().seq <= through_seq) {
    records_.pop_front();
    ++dropped;
  }
  rearm_if_below();
  return dropped;
}

void EventRing::clear() {
  records_.clear();
  rearm_if_below();
}

void EventRing::rearm_if_below() {
  if (records_.size() < kWarningThreshold) armed_ = true;
}

}  // namespace rfidtrace::net
