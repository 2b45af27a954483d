#include "rfidtrace/rf/field.hpp"

#include <algorithm>
#include <cmath>

namespace rfidtrace::rf {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::TagNotFound: return "TagNotFound";
    case Errc::BlockOutOfRange: return "BlockOutOfRange";
    case Errc::BlockLocked: return "BlockLocked";
    case Errc::DuplicateUid: return "DuplicateUid";
    case Errc::InvalidTag: return "InvalidTag";
    case Errc::UnknownReader: return "UnknownReader";
    case Errc::BadDocument: return "BadDocument";
  }
  return "Unknown";
}

const std::vector<ReaderProfile>& default_profiles() {
  static const std::vector<ReaderProfile> profiles{
      {"short", {9.0, 6.0, kDefaultTagCap}},
      {"standard", {25.0, 15.0, kDefaultTagCap}},
      {"long", {40.0, 20.0, kDefaultTagCap}},
  };
  return profiles;
}

const ReaderProfile& default_profile(std::string_view name) {
  for (const auto& p : default_profiles()) {
    if (p.name == name) return p;
  }
  throw Error(Errc::UnknownReader, "no reader profile named '" + std::string(name) + "'");
}

TagEmulation::TagEmulation(Uid uid, std::size_t block_count, std::size_t block_size,
                           double position_cm)
    : uid_(uid), block_size_(block_size), memory_(block_count * block_size, 0),
      locks_(block_count, false), position_cm_(0.0) {
  if (!uid.valid_family()) throw Error(Errc::InvalidTag, "uid must start with E0: " + uid.hex());
  if (block_count == 0 || block_size == 0) {
    throw Error(Errc::InvalidTag, "block count and block size must be >= 1");
  }
  set_position_cm(position_cm);
}

void TagEmulation::set_position_cm(double position) {
  if (!(position >= 0.0) || !std::isfinite(position)) {
    throw Error(Errc::InvalidTag, "position must be a non-negative distance");
  }
  position_cm_ = position;
}

ByteView TagEmulation::block(std::size_t index) const {
  if (index >= block_count()) throw Error(Errc::BlockOutOfRange);
  return ByteView(memory_).subspan(index * block_size_, block_size_);
}

void TagEmulation::load_memory(ByteView bytes) {
  if (bytes.size() > memory_.size()) throw Error(Errc::InvalidTag, "memory image too large");
  std::fill(memory_.begin(), memory_.end(), 0);
  std::copy(bytes.begin(), bytes.end(), memory_.begin());
}

void TagEmulation::write(std::size_t first, const std::vector<Bytes>& blocks) {
  if (first > block_count() || blocks.size() > block_count() - first) {
    throw Error(Errc::BlockOutOfRange);
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].size() != block_size_) {
      throw Error(Errc::InvalidTag, "block image must be " + std::to_string(block_size_) + " bytes");
    }
    if (locks_[first + i]) throw Error(Errc::BlockLocked, "block " + std::to_string(first + i));
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    std::copy(blocks[i].begin(), blocks[i].end(),
              memory_.begin() + static_cast<std::ptrdiff_t>((first + i) * block_size_));
  }
}

bool in_read_range(const TagEmulation& tag, const FieldGeometry& geometry) noexcept {
  return tag.position_cm() <= geometry.read_range_cm;
}

bool in_write_range(const TagEmulation& tag, const FieldGeometry& geometry) noexcept {
  return tag.position_cm() <= geometry.write_range_cm;
}

std::vector<Bytes> read_blocks(std::span<const TagEmulation> field, const FieldGeometry& geometry,
                               const Uid& uid, std::size_t first, std::size_t count) {
  auto it = std::find_if(field.begin(), field.end(), [&](const auto& t) { return t.uid() == uid; });
  if (it == field.end() || !in_read_range(*it, geometry)) throw Error(Errc::TagNotFound, uid.hex());
  if (first > it->block_count() || count > it->block_count() - first) {
    throw Error(Errc::BlockOutOfRange, "blocks " + std::to_string(first) + "+" +
                                           std::to_string(count) + " on a " +
                                           std::to_string(it->block_count()) + "-block tag");
  }
  std::vector<Bytes> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto b = it->block(first + i);
    out.emplace_back(b.begin(), b.end());
  }
  return out;
}

void write_blocks(std::span<TagEmulation> field, const FieldGeometry& geometry, const Uid& uid,
                  std::size_t first, const std::vector<Bytes>& blocks) {
  auto it = std::find_if(field.begin(), field.end(), [&](const auto& t) { return t.uid() == uid; });
  if (it == field.end() || !in_write_range(*it, geometry)) throw Error(Errc::TagNotFound, uid.hex());
  it->write(first, blocks);
}

}  // namespace rfidtrace::rf
