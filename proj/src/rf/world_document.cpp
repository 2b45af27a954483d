#include "rfidtrace/rf/world_document.hpp"

#include <map>

#include "rfidtrace/common/hex.hpp"

namespace rfidtrace::rf {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::BadDocument, what); }

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("bad value for '") + key + "'");
  }
}

FieldGeometry geometry_from(const json& p) {
  FieldGeometry g;
  g.read_range_cm = get_or<double>(p, "read_range_cm", g.read_range_cm);
  g.write_range_cm = get_or<double>(p, "write_range_cm", std::min(g.write_range_cm, g.read_range_cm));
  g.max_tags = get_or<std::size_t>(p, "max_tags", g.max_tags);
  if (!(g.read_range_cm >= 0) || !(g.write_range_cm >= 0) || g.write_range_cm > g.read_range_cm) {
    bad("profile ranges must satisfy 0 <= write_range_cm <= read_range_cm");
  }
  if (g.max_tags == 0) bad("max_tags must be >= 1");
  return g;
}

}  // namespace

LoadedWorld world_from_json(const json& doc, const PayloadEncoder& encoder) {
  if (!doc.is_object()) bad("world document must be an object");

  SlotTiming timing;
  if (doc.contains("timing")) {
    const auto& t = doc["timing"];
    timing.slot_duration_us = get_or<std::uint64_t>(t, "slot_duration_us", timing.slot_duration_us);
    timing.single_read_duration_us =
        get_or<std::uint64_t>(t, "single_read_duration_us", timing.single_read_duration_us);
  }

  std::map<std::string, ReaderProfile> profiles;
  for (const auto& p : default_profiles()) profiles[p.name] = p;
  for (const auto& p : doc.value("profiles", json::array())) {
    auto name = get_or<std::string>(p, "name", "");
    if (name.empty()) bad("profile without a name");
    profiles[name] = ReaderProfile{name, geometry_from(p)};
  }

  LoadedWorld loaded{World(timing), {}};
  auto& world = loaded.world;
  world.set_clock_us(get_or<std::uint64_t>(doc, "clock_us", 0));

  for (const auto& r : doc.value("readers", json::array())) {
    if (!r.contains("id")) bad("reader without an id");
    auto id = get_or<int>(r, "id", -1);
    if (id < 0 || id > 0xFFFF) bad("reader id out of range");
    auto name = get_or<std::string>(r, "profile", "standard");
    auto it = profiles.find(name);
    if (it == profiles.end()) bad("unknown profile '" + name + "'");
    world.add_reader(static_cast<ReaderId>(id), it->second);
  }

  for (const auto& t : doc.value("tags", json::array())) {
    Uid uid;
    try {
      uid = Uid::parse(t.at("uid").get<std::string>());
    } catch (const std::exception& e) {
      bad(std::string("bad tag uid: ") + e.what());
    }
    TagEmulation tag(uid, get_or<std::size_t>(t, "block_count", kDefaultBlockCount),
                     get_or<std::size_t>(t, "block_size", kDefaultBlockSize),
                     get_or<double>(t, "position_cm", 0.0));
    if (t.contains("memory") && t.contains("payload")) bad("tag has both memory and payload");
    if (t.contains("memory")) {
      try {
        tag.load_memory(from_hex(t["memory"].get<std::string>()));
      } catch (const std::invalid_argument& e) {
        bad(std::string("bad memory image: ") + e.what());
      }
    } else if (t.contains("payload")) {
      if (!encoder) bad("tag payloads need a template registry");
      tag.load_memory(encoder(t["payload"]));
    }
    for (const auto& index : t.value("locked", json::array())) {
      auto i = index.get<std::size_t>();
      if (i >= tag.block_count()) bad("locked block out of range");
      tag.lock(i);
    }
    std::optional<ReaderId> reader;
    if (t.contains("reader") && !t["reader"].is_null()) {
      reader = static_cast<ReaderId>(get_or<int>(t, "reader", 0));
      if (!world.has_reader(*reader)) bad("tag placed at undeclared reader " + std::to_string(*reader));
    }
    auto events = world.add_tag(std::move(tag), reader);
    loaded.events.insert(loaded.events.end(), events.begin(), events.end());
  }
  return loaded;
}

LoadedWorld parse_world_document(std::string_view text, const PayloadEncoder& encoder) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(e.what());
  }
  return world_from_json(doc, encoder);
}

json world_to_json(const World& world) {
  json doc;
  doc["timing"] = {{"slot_duration_us", world.timing().slot_duration_us},
                   {"single_read_duration_us", world.timing().single_read_duration_us}};
  doc["clock_us"] = world.now_us();
  json profiles = json::array();
  json readers = json::array();
  std::map<std::string, FieldGeometry> emitted;
  for (auto id : world.readers()) {
    const auto& p = world.reader_profile(id);
    auto name = p.name.empty() ? "reader-" + std::to_string(id) : p.name;
    auto it = emitted.find(name);
    if (it != emitted.end() &&
        (it->second.read_range_cm != p.geometry.read_range_cm ||
         it->second.write_range_cm != p.geometry.write_range_cm ||
         it->second.max_tags != p.geometry.max_tags)) {
      name = "reader-" + std::to_string(id);
    }
    if (!emitted.contains(name)) {
      emitted[name] = p.geometry;
      profiles.push_back({{"name", name},
                          {"read_range_cm", p.geometry.read_range_cm},
                          {"write_range_cm", p.geometry.write_range_cm},
                          {"max_tags", p.geometry.max_tags}});
    }
    readers.push_back({{"id", id}, {"profile", name}});
  }
  doc["profiles"] = profiles;
  doc["readers"] = readers;

  json tags = json::array();
  auto dump_tag = [&](const TagEmulation& tag, std::optional<ReaderId> reader) {
    json locked = json::array();
    for (std::size_t i = 0; i < tag.block_count(); ++i) {
      if (tag.locked(i)) locked.push_back(i);
    }
    json entry = {{"uid", tag.uid().hex()},
                  {"position_cm", tag.position_cm()},
                  {"block_count", tag.block_count()},
                  {"block_size", tag.block_size()},
                  {"memory", to_hex(tag.memory())},
                  {"locked", locked}};
    entry["reader"] = reader ? json(*reader) : json(nullptr);
    tags.push_back(std::move(entry));
  };
  for (auto id : world.readers()) {
    for (const auto& tag : world.tags_at(id)) dump_tag(tag, id);
  }
  for (const auto& tag : world.unplaced_tags()) dump_tag(tag, std::nullopt);
  doc["tags"] = tags;
  return doc;
}

}  // namespace rfidtrace::rf
