#include <doctest.h>

#include "rfidtrace/store/alarms.hpp"
#include "rfidtrace/store/schema.hpp"

using namespace rfidtrace;
using namespace rfidtrace::store;

namespace {

const rf::Uid kWatched = rf::Uid::parse("E000000000000042");
const rf::Uid kOther = rf::Uid::parse("E000000000000043");
constexpr std::uint64_t kSecond = 1000000;

net::EventRecord event(net::EventKind kind, std::uint8_t station, std::optional<rf::Uid> uid = std::nullopt) {
  return net::EventRecord{1, station, kind, uid, 0};
}

AlarmEngine engine_with(std::vector<AlarmRule> rules) {
  AlarmEngine e;
  e.set_rules(std::move(rules));
  return e;
}

}  // namespace

TEST_CASE("watchlisted uid at a watched station raises one alarm") {
  auto e = engine_with({rule_from_json({{"name", "w"}, {"trigger", "watchlist_seen"},
                                        {"uids", {kWatched.hex()}}, {"stations", {3}}})});
  const auto hit = e.on_event(event(net::EventKind::TagEnter, 3, kWatched));
  REQUIRE(hit.size() == 1);
  CHECK(hit[0].rule == "w");
  CHECK(hit[0].station == 3);
  CHECK(hit[0].uid == kWatched);
  CHECK(e.on_event(event(net::EventKind::TagEnter, 3, kOther)).empty());
  CHECK(e.on_event(event(net::EventKind::TagEnter, 4, kWatched)).empty());
  CHECK(e.on_event(event(net::EventKind::TagLeave, 3, kWatched)).empty());
  CHECK(e.on_event(event(net::EventKind::Alarm, 3, kWatched)).empty());
}

TEST_CASE("overrun rule follows buffer warnings") {
  auto e = engine_with({rule_from_json({{"name", "o"}, {"trigger", "event_buffer_overrun"}})});
  CHECK(e.on_event(event(net::EventKind::BufferOverrunWarning, 9)).size() == 1);
  CHECK(e.on_event(event(net::EventKind::TagEnter, 9, kWatched)).empty());
}

TEST_CASE("station silence timeline") {
  auto e = engine_with({rule_from_json({{"name", "s"}, {"trigger", "station_silent"}, {"silent_after_s", 60}})});
  e.note_contact(2, 0);
  // Hand-stepped: contact at t=0; ticks at 59 s, 61 s, 62 s; contact at 70 s;
  // ticks at 100 s and 130 s.
  CHECK(e.tick(59 * kSecond).empty());
  const auto fired = e.tick(61 * kSecond);
  REQUIRE(fired.size() == 1);
  CHECK(fired[0].station == 2);
  CHECK(e.tick(62 * kSecond).empty());
  e.note_contact(2, 70 * kSecond);
  CHECK(e.tick(100 * kSecond).empty());
  CHECK(e.tick(130 * kSecond).size() == 1);
  CHECK(e.tick(131 * kSecond).empty());
}

TEST_CASE("silence boundary is inclusive") {
  auto e = engine_with({rule_from_json({{"name", "s"}, {"trigger", "station_silent"}, {"silent_after_us", 100}})});
  e.track(1, 0);
  e.track(1, 50);  // tracking does not count as contact
  CHECK(e.tick(99).empty());
  CHECK(e.tick(100).size() == 1);
}

TEST_CASE("rule validation and rows") {
  CHECK_THROWS_AS(rule_from_json({{"name", "x"}, {"trigger", "explode"}}), Error);
  CHECK_THROWS_AS(rule_from_json({{"name", "x"}, {"trigger", "watchlist_seen"}}), Error);
  CHECK_THROWS_AS(rule_from_json({{"name", "x"}, {"trigger", "station_silent"}}), Error);
  CHECK_THROWS_AS(rule_from_json({{"name", ""}, {"trigger", "event_buffer_overrun"}}), Error);
  CHECK_THROWS_AS(rule_from_json({{"name", "x"}, {"trigger", "event_buffer_overrun"}, {"bogus", 1}}), Error);
  CHECK_THROWS_AS(rule_from_json({{"name", "x"}, {"trigger", "event_buffer_overrun"}, {"stations", {31}}}), Error);

  const auto r = rule_from_json({{"name", "w"}, {"trigger", "watchlist_seen"}, {"uids", {kWatched.hex()}},
                                 {"stations", {1, 2}}});
  const auto row = rule_to_row(r);
  CHECK(row.size() == builtin_schema(tables::kAlarmRules).columns.size());
  const auto back = rule_from_row(row);
  CHECK(back.name == "w");
  CHECK(back.uids == r.uids);
  CHECK(back.stations == r.stations);
  CHECK(rule_to_json(back) == rule_to_json(r));
}
