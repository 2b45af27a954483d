#include "rfidtrace/rf/world.hpp"

#include <algorithm>

namespace rfidtrace::rf {

World::World(SlotTiming timing) : timing_(timing) {}

void World::add_reader(ReaderId id, ReaderProfile profile) {
  if (profile.geometry.write_range_cm > profile.geometry.read_range_cm) {
    throw Error(Errc::BadDocument, "write range exceeds read range for reader " + std::to_string(id));
  }
  auto it = fields_.find(id);
  if (it != fields_.end()) {
    it->second.profile = std::move(profile);
  } else {
    fields_.emplace(id, ReaderField{std::move(profile), {}});
  }
}

World::ReaderField& World::field(ReaderId id) {
  auto it = fields_.find(id);
  if (it == fields_.end()) throw Error(Errc::UnknownReader, "reader " + std::to_string(id));
  return it->second;
}

const World::ReaderField& World::field(ReaderId id) const {
  auto it = fields_.find(id);
  if (it == fields_.end()) throw Error(Errc::UnknownReader, "reader " + std::to_string(id));
  return it->second;
}

const ReaderProfile& World::reader_profile(ReaderId id) const { return field(id).profile; }

std::vector<ReaderId> World::readers() const {
  std::vector<ReaderId> ids;
  for (const auto& [id, _] : fields_) ids.push_back(id);
  return ids;
}

std::size_t World::tag_count() const noexcept {
  auto n = unplaced_.size();
  for (const auto& [_, f] : fields_) n += f.tags.size();
  return n;
}

const TagEmulation* World::find_tag(const Uid& uid) const {
  for (const auto& [_, f] : fields_) {
    for (const auto& t : f.tags) {
      if (t.uid() == uid) return &t;
    }
  }
  for (const auto& t : unplaced_) {
    if (t.uid() == uid) return &t;
  }
  return nullptr;
}

std::optional<ReaderId> World::reader_of(const Uid& uid) const {
  for (const auto& [id, f] : fields_) {
    for (const auto& t : f.tags) {
      if (t.uid() == uid) return id;
    }
  }
  return std::nullopt;
}

std::vector<TagEmulation> World::tags_at(ReaderId reader) const { return field(reader).tags; }

std::vector<FieldEvent> World::add_tag(TagEmulation tag, std::optional<ReaderId> reader) {
  if (find_tag(tag.uid()) != nullptr) throw Error(Errc::DuplicateUid, tag.uid().hex());
  std::vector<FieldEvent> events;
  if (!reader) {
    unplaced_.push_back(std::move(tag));
    return events;
  }
  auto& f = field(*reader);
  if (in_read_range(tag, f.profile.geometry)) {
    events.push_back({FieldEvent::Kind::Enter, tag.uid(), *reader});
  }
  f.tags.push_back(std::move(tag));
  return events;
}

TagEmulation World::take(const Uid& uid, std::optional<ReaderId>& from) {
  auto pull = [&](std::vector<TagEmulation>& tags) -> std::optional<TagEmulation> {
    auto it = std::find_if(tags.begin(), tags.end(), [&](const auto& t) { return t.uid() == uid; });
    if (it == tags.end()) return std::nullopt;
    TagEmulation tag = std::move(*it);
    tags.erase(it);
    return tag;
  };
  for (auto& [id, f] : fields_) {
    if (auto tag = pull(f.tags)) {
      from = id;
      return std::move(*tag);
    }
  }
  if (auto tag = pull(unplaced_)) {
    from.reset();
    return std::move(*tag);
  }
  throw Error(Errc::TagNotFound, uid.hex());
}

std::vector<FieldEvent> World::move_tag(const Uid& uid, double position_cm) {
  return move_tag(uid, reader_of(uid), position_cm);
}

std::vector<FieldEvent> World::move_tag(const Uid& uid, std::optional<ReaderId> reader,
                                        double position_cm) {
  if (reader) field(*reader);  // validate before mutating
  if (find_tag(uid) == nullptr) throw Error(Errc::TagNotFound, uid.hex());

  std::optional<ReaderId> from;
  TagEmulation tag = take(uid, from);
  const bool was_in = from && in_read_range(tag, field(*from).profile.geometry);
  const double old_position = tag.position_cm();
  try {
    tag.set_position_cm(position_cm);
  } catch (...) {
    tag.set_position_cm(old_position);
    if (from) {
      field(*from).tags.push_back(std::move(tag));
    } else {
      unplaced_.push_back(std::move(tag));
    }
    throw;
  }
  const bool now_in = reader && in_read_range(tag, field(*reader).profile.geometry);

  std::vector<FieldEvent> events;
  if (was_in && (!now_in || from != reader)) {
    events.push_back({FieldEvent::Kind::Leave, uid, *from});
  }
  if (now_in && (!was_in || from != reader)) {
    events.push_back({FieldEvent::Kind::Enter, uid, *reader});
  }
  if (reader) {
    field(*reader).tags.push_back(std::move(tag));
  } else {
    unplaced_.push_back(std::move(tag));
  }
  return events;
}

InventoryResult World::inventory(ReaderId reader) {
  const auto& f = field(reader);
  auto result = rf::inventory(f.tags, f.profile.geometry, timing_);
  clock_us_ += result.duration_us;
  return result;
}

std::vector<Bytes> World::read_blocks(ReaderId reader, const Uid& uid, std::size_t first,
                                      std::size_t count) {
  const auto& f = field(reader);
  auto blocks = rf::read_blocks(f.tags, f.profile.geometry, uid, first, count);
  clock_us_ += timing_.single_read_duration_us * count;
  return blocks;
}

void World::write_blocks(ReaderId reader, const Uid& uid, std::size_t first,
                         const std::vector<Bytes>& blocks) {
  auto& f = field(reader);
  rf::write_blocks(f.tags, f.profile.geometry, uid, first, blocks);
  clock_us_ += timing_.single_read_duration_us * blocks.size();
}

}  // namespace rfidtrace::rf
