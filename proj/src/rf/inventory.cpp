#include "rfidtrace/rf/inventory.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <stdexcept>

namespace rfidtrace::rf {
namespace {

struct Mask {
  std::uint64_t value;
  unsigned length;  // bits
};

bool matches(std::uint64_t uid, const Mask& mask) {
  if (mask.length == 0) return true;
  if (mask.length >= 64) return uid == mask.value;
  const auto low = (std::uint64_t{1} << mask.length) - 1;
  return (uid & low) == mask.value;
}

}  // namespace

InventoryResult inventory(std::span<const TagEmulation> field, const FieldGeometry& geometry,
                          const SlotTiming& timing) {
  constexpr unsigned kSlotBits = 4;
  constexpr std::size_t kSlots = 1u << kSlotBits;

  std::vector<std::uint64_t> present;
  for (const auto& tag : field) {
    if (in_read_range(tag, geometry)) present.push_back(tag.uid().value());
  }

  InventoryResult result;
  std::vector<std::uint64_t> found;
  std::deque<Mask> pending{Mask{0, 0}};

  while (!pending.empty()) {
    const auto mask = pending.front();
    pending.pop_front();
    ++result.rounds_used;

    std::array<std::vector<std::uint64_t>, kSlots> slots;
    for (auto uid : present) {
      if (matches(uid, mask)) slots[(uid >> mask.length) & (kSlots - 1)].push_back(uid);
    }
    for (std::size_t s = 0; s < kSlots; ++s) {
      if (slots[s].size() == 1) {
        found.push_back(slots[s].front());
      } else if (slots[s].size() > 1) {
        if (mask.length + kSlotBits > 64) throw std::logic_error("duplicate uid in field");
        pending.push_back(Mask{mask.value | (std::uint64_t{s} << mask.length),
                               mask.length + kSlotBits});
      }
    }
    if (found.size() >= geometry.max_tags && !pending.empty()) {
      result.truncated = true;
      break;
    }
  }

  std::sort(found.begin(), found.end());
  if (found.size() > geometry.max_tags) {
    found.resize(geometry.max_tags);
    result.truncated = true;
  }
  result.uids.reserve(found.size());
  for (auto v : found) result.uids.push_back(Uid::from_value(v));
  result.duration_us = std::uint64_t{result.rounds_used} * timing.slots_per_round *
                       timing.slot_duration_us;
  return result;
}

}  // namespace rfidtrace::rf
