#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfidtrace/common/bytes.hpp"
#include "rfidtrace/common/error.hpp"
#include "rfidtrace/rf/uid.hpp"

namespace rfidtrace::rf {

enum class Errc {
  TagNotFound,
  BlockOutOfRange,
  BlockLocked,
  DuplicateUid,
  InvalidTag,
  UnknownReader,
  BadDocument,
};

std::string_view to_string(Errc code);
using Error = BasicError<Errc>;

inline constexpr std::size_t kDefaultBlockCount = 64;
inline constexpr std::size_t kDefaultBlockSize = 4;
inline constexpr std::size_t kDefaultTagCap = 64;

/// Hard-cutoff range model: a tag is readable iff position_cm <= read_range_cm
/// and writable iff position_cm <= write_range_cm.
struct FieldGeometry {
  double read_range_cm = 40.0;
  double write_range_cm = 20.0;
  /// Tags singulated per inventory command before the reader stops.
  std::size_t max_tags = kDefaultTagCap;
};

struct ReaderProfile {
  std::string name;
  FieldGeometry geometry;
};

/// "short" (9 cm), "standard" (25 cm) and "long" (40 cm) reader profiles.
const std::vector<ReaderProfile>& default_profiles();
const ReaderProfile& default_profile(std::string_view name);

/// Simulated air-interface timing, in simulated microseconds.
struct SlotTiming {
  std::uint64_t slot_duration_us = 1000;
  std::uint32_t slots_per_round = 16;
  /// Cost of reading or writing one block of one singulated tag. 8333 us
  /// gives ~120 single-block reads per simulated second.
  std::uint64_t single_read_duration_us = 8333;
};

class TagEmulation {
 public:
  TagEmulation(Uid uid, std::size_t block_count = kDefaultBlockCount,
               std::size_t block_size = kDefaultBlockSize, double position_cm = 0.0);

  const Uid& uid() const noexcept { return uid_; }
  std::size_t block_count() const noexcept { return locks_.size(); }
  std::size_t block_size() const noexcept { return block_size_; }
  std::size_t capacity() const noexcept { return memory_.size(); }
  double position_cm() const noexcept { return position_cm_; }
  void set_position_cm(double position);

  ByteView block(std::size_t index) const;
  const Bytes& memory() const noexcept { return memory_; }
  bool locked(std::size_t index) const { return locks_.at(index); }
  void lock(std::size_t index) { locks_.at(index) = true; }
  /// Raw memory load, ignoring locks (used when building worlds).
  void load_memory(ByteView bytes);

  /// Replaces `blocks` starting at `first`; all or nothing.
  void write(std::size_t first, const std::vector<Bytes>& blocks);

 private:
  Uid uid_;
  std::size_t block_size_;
  Bytes memory_;
  std::vector<bool> locks_;
  double position_cm_;
};

bool in_read_range(const TagEmulation& tag, const FieldGeometry& geometry) noexcept;
bool in_write_range(const TagEmulation& tag, const FieldGeometry& geometry) noexcept;

/// Reads `count` blocks from a tag present in `field` and within read range.
/// Throws TagNotFound or BlockOutOfRange.
std::vector<Bytes> read_blocks(std::span<const TagEmulation> field, const FieldGeometry& geometry,
                               const Uid& uid, std::size_t first, std::size_t count);

/// Throws TagNotFound (absent or outside write range), BlockOutOfRange, or
/// BlockLocked. On any error the tag memory is unchanged.
void write_blocks(std::span<TagEmulation> field, const FieldGeometry& geometry, const Uid& uid,
                  std::size_t first, const std::vector<Bytes>& blocks);

}  // namespace rfidtrace::rf
