#include <doctest.h>

#include "rfidtrace/common/hex.hpp"
#include "rfidtrace/rf/world.hpp"
#include "rfidtrace/rf/world_document.hpp"

using namespace rfidtrace;
using namespace rfidtrace::rf;

namespace {

Uid uid(std::uint64_t low) { return Uid::from_value((std::uint64_t{0xE0} << 56) | low); }
using K = FieldEvent::Kind;

}  // namespace

TEST_CASE("move_tag emits enter and leave on crossings") {
  World world;
  world.add_reader(3, default_profile("long"));
  CHECK(world.add_tag(TagEmulation(uid(1), 4, 4, 50.0), 3).empty());

  auto events = world.move_tag(uid(1), 10.0);
  REQUIRE(events.size() == 1);
  CHECK(events[0] == FieldEvent{K::Enter, uid(1), 3});

  CHECK(world.move_tag(uid(1), 10.0).empty());
  CHECK(world.move_tag(uid(1), 39.0).empty());

  events = world.move_tag(uid(1), 50.0);
  REQUIRE(events.size() == 1);
  CHECK(events[0] == FieldEvent{K::Leave, uid(1), 3});
}

TEST_CASE("moving between readers leaves one field and enters another") {
  World world;
  world.add_reader(1, default_profile("long"));
  world.add_reader(2, default_profile("short"));
  auto placed = world.add_tag(TagEmulation(uid(9), 4, 4, 1.0), 1);
  REQUIRE(placed.size() == 1);

  auto events = world.move_tag(uid(9), ReaderId{2}, 5.0);
  REQUIRE(events.size() == 2);
  CHECK(events[0] == FieldEvent{K::Leave, uid(9), 1});
  CHECK(events[1] == FieldEvent{K::Enter, uid(9), 2});
  CHECK(world.reader_of(uid(9)) == ReaderId{2});

  events = world.move_tag(uid(9), std::nullopt, 0.0);
  REQUIRE(events.size() == 1);
  CHECK(events[0].kind == K::Leave);
  CHECK_FALSE(world.reader_of(uid(9)).has_value());
}

TEST_CASE("world errors") {
  World world;
  world.add_reader(1, default_profile("long"));
  world.add_tag(TagEmulation(uid(1)), 1);
  CHECK_THROWS_AS(world.add_tag(TagEmulation(uid(1)), 1), Error);
  CHECK_THROWS_AS(world.move_tag(uid(2), 1.0), Error);
  CHECK_THROWS_AS(world.move_tag(uid(1), ReaderId{7}, 1.0), Error);
  CHECK_THROWS_AS(world.move_tag(uid(1), -3.0), Error);
  CHECK(world.find_tag(uid(1))->position_cm() == 0.0);
  CHECK_THROWS_AS(world.inventory(9), Error);
}

TEST_CASE("inventory and reads advance the simulated clock") {
  World world;
  world.add_reader(1, default_profile("long"));
  world.add_tag(TagEmulation(uid(1)), 1);
  auto r = world.inventory(1);
  CHECK(world.now_us() == r.duration_us);
  world.read_blocks(1, uid(1), 0, 2);
  CHECK(world.now_us() == r.duration_us + 2 * world.timing().single_read_duration_us);
}

TEST_CASE("world document load and snapshot") {
  const auto loaded = parse_world_document(R"({
    "profiles": [{"name": "dock", "read_range_cm": 30, "write_range_cm": 12}],
    "readers": [{"id": 3, "profile": "long"}, {"id": 4, "profile": "dock"}],
    "tags": [
      {"uid": "E000000000000001", "reader": 3, "position_cm": 5, "memory": "0102", "locked": [1]},
      {"uid": "E000000000000002", "reader": 4, "position_cm": 35},
      {"uid": "E000000000000003"}
    ]})");
  const auto& world = loaded.world;
  CHECK(world.tag_count() == 3);
  REQUIRE(loaded.events.size() == 1);
  CHECK(loaded.events[0] == FieldEvent{K::Enter, uid(1), 3});
  CHECK(world.reader_profile(4).geometry.read_range_cm == 30.0);
  CHECK(world.find_tag(uid(1))->locked(1));
  CHECK(world.find_tag(uid(1))->block(0)[1] == 0x02);

  const auto again = world_from_json(world_to_json(world));
  CHECK(world_to_json(again.world) == world_to_json(world));
  CHECK(again.world.reader_profile(3).name == "long");
}

TEST_CASE("world document errors are precise") {
  auto message_of = [](const char* text) -> std::string {
    try {
      parse_world_document(text);
    } catch (const Error& e) {
      return e.what();
    }
    return "accepted";
  };
  CHECK(message_of("{") != "accepted");
  CHECK(message_of(R"({"readers": [{"id": 1, "profile": "nope"}]})").find("unknown profile") !=
        std::string::npos);
  CHECK(message_of(R"({"tags": [{"uid": "E000000000000001", "reader": 2}]})").find("undeclared reader") !=
        std::string::npos);
  CHECK(message_of(R"({"tags": [{"uid": "E000000000000001", "payload": {}}]})").find("template") !=
        std::string::npos);
  CHECK(message_of(R"({"profiles": [{"name": "x", "read_range_cm": 5, "write_range_cm": 9}]})") !=
        "accepted");
}
