#include <doctest.h>

#include "rfidtrace/net/station.hpp"
#include "rfidtrace/rf/inventory.hpp"
#include "support/net_rig.hpp"

using namespace rfidtrace;
using namespace rfidtrace::net;
using gen::tag_uid;

namespace {

struct Fixture {
  rf::World world;
  Station station{5, gen::kPassword, world, 5};
  Fixture() { world.add_reader(5, rf::default_profile("long")); }

  Frame one(std::uint8_t cmd, Bytes payload = {}) {
    auto r = station.dispatch(Frame{5, cmd, std::move(payload)});
    REQUIRE(r.size() == 1);
    return r[0];
  }
};

Status status_of(const Frame& f) { return static_cast<Status>(f.payload.at(0)); }

Bytes pw_then(std::initializer_list<std::uint8_t> rest, Password pw = gen::kPassword) {
  Bytes out(pw.begin(), pw.end());
  for (auto b : rest) out.push_back(b);
  return out;
}

}  // namespace

TEST_CASE("ping reports address, firmware and event counters") {
  Fixture fx;
  fx.station.record(EventKind::Alarm);
  const auto r = fx.one(code(Command::Ping));
  CHECK(r.addr == 5);
  CHECK(r.cmd == 0x81);
  REQUIRE(r.payload.size() == 11);
  CHECK(status_of(r) == Status::Ok);
  CHECK(r.payload[2] == 5);
  CHECK(r.payload[3] == 1);
  CHECK(r.payload[4] == 0);
  CHECK(get_le<std::uint16_t>(r.payload, 5) == 1);
  CHECK(get_le<std::uint32_t>(r.payload, 7) == 1);
}

TEST_CASE("protected commands check the password") {
  Fixture fx;
  const Password wrong{'x', 'x', 'x', 'x'};
  CHECK(status_of(fx.one(code(Command::SetPassword), pw_then({'A', 'B', 'C', 'D'}, wrong))) ==
        Status::AuthFailed);
  CHECK(status_of(fx.one(code(Command::SetBaud), pw_then({4}, wrong))) == Status::AuthFailed);
  CHECK(status_of(fx.one(code(Command::ClearEvents), pw_then({}, wrong))) == Status::AuthFailed);
  CHECK(status_of(fx.one(code(Command::SetAddr), pw_then({7}, wrong))) == Status::AuthFailed);
  CHECK(fx.station.addr() == 5);
  CHECK(fx.station.last_seq() == 0);

  CHECK(status_of(fx.one(code(Command::SetBaud), pw_then({4}))) == Status::Ok);
  CHECK(fx.station.baud() == BaudClass::B115200);
  CHECK(status_of(fx.one(code(Command::SetBaud), pw_then({5}))) == Status::BadRequest);
  CHECK(status_of(fx.one(code(Command::SetPassword), pw_then({'A', 'B', 'C', 'D'}))) == Status::Ok);
  CHECK(status_of(fx.one(code(Command::SetBaud), pw_then({1}))) == Status::AuthFailed);
  CHECK(status_of(fx.one(code(Command::SetBaud), pw_then({1}, {'A', 'B', 'C', 'D'}))) == Status::Ok);
}

TEST_CASE("set address moves the station") {
  Fixture fx;
  CHECK(status_of(fx.one(code(Command::SetAddr), pw_then({9}))) == Status::Ok);
  CHECK(fx.station.addr() == 9);
  CHECK(fx.station.dispatch(Frame{5, code(Command::Ping), {}}).empty());
  CHECK(fx.station.dispatch(Frame{9, code(Command::Ping), {}}).size() == 1);
  CHECK(fx.station.ring().read(0).back().kind == EventKind::ConfigChange);
}

TEST_CASE("unknown commands and malformed payloads") {
  Fixture fx;
  CHECK(status_of(fx.one(0x42)) == Status::UnknownCommand);
  CHECK(status_of(fx.one(code(Command::Inventory), {1})) == Status::BadRequest);
  CHECK(status_of(fx.one(code(Command::ReadTag), {1, 2, 3})) == Status::BadRequest);
  CHECK(status_of(fx.one(code(Command::GetEvents), {1})) == Status::BadRequest);
}

TEST_CASE("broadcast and foreign frames get no response") {
  Fixture fx;
  CHECK(fx.station.dispatch(Frame{kBroadcast, code(Command::Ping), {}}).empty());
  CHECK(fx.station.dispatch(Frame{6, code(Command::Ping), {}}).empty());
  // Broadcasts still take effect.
  CHECK(fx.station.dispatch(Frame{kBroadcast, code(Command::SetBaud), pw_then({2})}).empty());
  CHECK(fx.station.baud() == BaudClass::B38400);
}

TEST_CASE("inventory matches the reader field and splits into frames") {
  Fixture fx;
  for (std::uint64_t i = 0; i < 40; ++i) {
    fx.world.add_tag(rf::TagEmulation(tag_uid(i * 7919 + 1), 4, 4, i < 30 ? 1.0 : 45.0), 5);
  }
  const auto tags = fx.world.tags_at(5);
  const auto expected = rf::inventory(tags, rf::default_profile("long").geometry, fx.world.timing());
  REQUIRE(expected.uids.size() == 30);

  const auto frames = fx.station.dispatch(Frame{5, code(Command::Inventory), {}});
  REQUIRE(frames.size() == 2);
  CHECK((frames[0].payload[1] & kFlagMore) != 0);
  CHECK((frames[1].payload[1] & kFlagMore) == 0);
  std::vector<rf::Uid> got;
  for (const auto& f : frames) {
    CHECK(f.payload.size() == 3 + f.payload[2] * 8u);
    for (std::size_t i = 0; i < f.payload[2]; ++i) {
      rf::Uid u;
      std::copy_n(f.payload.begin() + 3 + i * 8, 8, u.bytes.begin());
      got.push_back(u);
    }
  }
  CHECK(got == expected.uids);
}

TEST_CASE("read and write through frames") {
  Fixture fx;
  fx.world.add_tag(rf::TagEmulation(tag_uid(1), 64, 4, 5.0), 5);
  const auto uid = tag_uid(1);
  Bytes req(uid.bytes.begin(), uid.bytes.end());
  Bytes write = req;
  write.push_back(2);
  append(write, Bytes{0xDE, 0xAD, 0xBE, 0xEF});
  CHECK(status_of(fx.one(code(Command::WriteTag), write)) == Status::Ok);

  Bytes read = req;
  read.push_back(2);
  read.push_back(1);
  const auto r = fx.one(code(Command::ReadTag), read);
  CHECK(status_of(r) == Status::Ok);
  CHECK(r.payload == Bytes{0, 0, 4, 1, 0xDE, 0xAD, 0xBE, 0xEF});

  read[8] = 63;
  read[9] = 2;
  CHECK(status_of(fx.one(code(Command::ReadTag), read)) == Status::BlockOutOfRange);

  Bytes missing(8, 0xE0);
  missing.push_back(0);
  missing.push_back(1);
  CHECK(status_of(fx.one(code(Command::ReadTag), missing)) == Status::TagNotFound);

  write[8] = 0;
  write.pop_back();
  CHECK(status_of(fx.one(code(Command::WriteTag), write)) == Status::BadRequest);
}

TEST_CASE("field events land in the ring with the world clock") {
  Fixture fx;
  fx.world.set_clock_us(777);
  fx.station.on_field_event({rf::FieldEvent::Kind::Enter, tag_uid(3), 5});
  fx.station.on_field_event({rf::FieldEvent::Kind::Enter, tag_uid(3), 6});  // other reader
  const auto events = fx.station.ring().read(0);
  REQUIRE(events.size() == 1);
  CHECK(events[0].seq == 1);
  CHECK(events[0].kind == EventKind::TagEnter);
  CHECK(events[0].uid == tag_uid(3));
  CHECK(events[0].sim_timestamp_us == 777);
}

TEST_CASE("station emits one overrun warning per crossing") {
  Fixture fx;
  for (int i = 0; i < 300; ++i) fx.station.record(EventKind::TagEnter, tag_uid(1));
  int warnings = 0;
  for (const auto& e : fx.station.ring().read(0)) warnings += e.kind == EventKind::BufferOverrunWarning;
  CHECK(fx.station.last_seq() == 301);
  CHECK(fx.station.ring().size() == 255);
  CHECK(warnings == 1);
}

TEST_CASE("state snapshot restores the station") {
  Fixture fx;
  for (int i = 0; i < 12; ++i) fx.station.record(EventKind::TagLeave, tag_uid(i));
  const auto s = fx.station.state();
  rf::World other;
  Station copy(0, Password{}, other, 5);
  copy.restore(s);
  CHECK(copy.addr() == 5);
  CHECK(copy.last_seq() == 12);
  CHECK(copy.ring().read(0) == fx.station.ring().read(0));
}
