#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rfidtrace/rf/field.hpp"

namespace rfidtrace::rf {

struct InventoryResult {
  std::vector<Uid> uids;  // ascending
  std::uint32_t rounds_used = 0;
  std::uint64_t duration_us = 0;
  /// True when the reader's tag cap stopped singulation early.
  bool truncated = false;
};

/// Deterministic 16-slot mask-extension anti-collision.
///
/// Each round carries a mask (value, bit length) over the low-order uid bits.
/// Every in-range tag whose low `length` bits equal the mask answers in the
/// slot given by the next 4 uid bits. A slot with one answer singulates that
/// tag; a slot with several answers is queued as a new round whose mask is
/// extended by that slot's 4 bits. Rounds run breadth-first until no
/// collided slot remains or the reader's tag cap is reached.
///
/// duration_us = rounds_used * slots_per_round * slot_duration_us.
InventoryResult inventory(std::span<const TagEmulation> field, const FieldGeometry& geometry,
                          const SlotTiming& timing);

}  // namespace rfidtrace::rf
