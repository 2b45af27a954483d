#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "rfidtrace/rf/field.hpp"
#include "rfidtrace/rf/inventory.hpp"

namespace rfidtrace::rf {

using ReaderId = std::uint16_t;

struct FieldEvent {
  enum class Kind { Enter, Leave };
  Kind kind;
  Uid uid;
  ReaderId reader;

  friend bool operator==(const FieldEvent&, const FieldEvent&) = default;
};

/// The simulation world: reader fields, the tags placed in them, and a
/// simulated clock. Not internally synchronized; one owner serializes all
/// access.
class World {
 public:
  explicit World(SlotTiming timing = {});

  void add_reader(ReaderId id, ReaderProfile profile);
  bool has_reader(ReaderId id) const { return fields_.contains(id); }
  const ReaderProfile& reader_profile(ReaderId id) const;
  std::vector<ReaderId> readers() const;

  /// Places a new tag. A tag with no reader sits outside every field.
  /// Emits Enter when it lands inside a read range.
  std::vector<FieldEvent> add_tag(TagEmulation tag, std::optional<ReaderId> reader);

  /// Moves a tag within its current field.
  std::vector<FieldEvent> move_tag(const Uid& uid, double position_cm);
  /// Moves a tag to `position_cm` in another reader's field (or out of all
  /// fields when `reader` is empty).
  std::vector<FieldEvent> move_tag(const Uid& uid, std::optional<ReaderId> reader,
                                   double position_cm);

  /// Runs one inventory at a reader and advances the clock by its duration.
  InventoryResult inventory(ReaderId reader);
  /// Advances the clock by single_read_duration_us per block on success.
  std::vector<Bytes> read_blocks(ReaderId reader, const Uid& uid, std::size_t first,
                                 std::size_t count);
  void write_blocks(ReaderId reader, const Uid& uid, std::size_t first,
                    const std::vector<Bytes>& blocks);

  const TagEmulation* find_tag(const Uid& uid) const;
  std::optional<ReaderId> reader_of(const Uid& uid) const;
  std::vector<TagEmulation> tags_at(ReaderId reader) const;
  std::vector<TagEmulation> unplaced_tags() const { return unplaced_; }
  std::size_t tag_count() const noexcept;

  std::uint64_t now_us() const noexcept { return clock_us_; }
  void advance_us(std::uint64_t delta) noexcept { clock_us_ += delta; }
  void set_clock_us(std::uint64_t now) noexcept { clock_us_ = now; }
  const SlotTiming& timing() const noexcept { return timing_; }

 private:
  struct ReaderField {
    ReaderProfile profile;
    std::vector<TagEmulation> tags;
  };

  ReaderField& field(ReaderId id);
  const ReaderField& field(ReaderId id) const;
  /// Detaches a tag from wherever it sits.
  TagEmulation take(const Uid& uid, std::optional<ReaderId>& from);

  SlotTiming timing_;
  std::uint64_t clock_us_ = 0;
  std::map<ReaderId, ReaderField> fields_;
  std::vector<TagEmulation> unplaced_;
};

}  // namespace rfidtrace::rf
