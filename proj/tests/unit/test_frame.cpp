#include <doctest.h>

#include <random>

#include "fixtures/frame_fixtures.hpp"
#include "oracles/crc_oracle.hpp"
#include "rfidtrace/common/crc16.hpp"
#include "rfidtrace/common/hex.hpp"
#include "rfidtrace/net/frame.hpp"

using namespace rfidtrace;
using namespace rfidtrace::net;

namespace {

Errc decode_error(ByteView bytes) {
  try {
    frame_decode(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("frame_decode unexpectedly succeeded");
  return Errc::Malformed;
}

Frame random_frame(std::mt19937_64& rng) {
  Frame f;
  const auto a = rng() % 31;
  f.addr = a == 30 ? kBroadcast : static_cast<std::uint8_t>(a);
  f.cmd = static_cast<std::uint8_t>(rng());
  f.payload.resize(rng() % (kMaxPayload + 1));
  for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng());
  return f;
}

}  // namespace

TEST_CASE("golden frames encode and decode") {
  for (const auto& fx : fixtures::frame_fixtures()) {
    CAPTURE(fx.name);
    const auto encoded = frame_encode(fx.addr, fx.cmd, from_hex(fx.payload_hex));
    CHECK(to_spaced_hex(encoded) == fx.frame_hex);
    const auto f = frame_decode(from_hex(fx.frame_hex));
    CHECK(f.addr == fx.addr);
    CHECK(f.cmd == fx.cmd);
    CHECK(f.payload == from_hex(fx.payload_hex));
  }
}

TEST_CASE("frame crc agrees with the bitwise oracle") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto f = random_frame(rng);
    const auto bytes = frame_encode(f);
    const ByteView covered = ByteView(bytes).subspan(1, bytes.size() - 3);
    const auto crc = oracle::crc16_bitwise(covered);
    REQUIRE(bytes[bytes.size() - 2] == (crc & 0xFF));
    REQUIRE(bytes[bytes.size() - 1] == (crc >> 8));
  }
}

TEST_CASE("encode rejects bad addresses and oversized payloads") {
  CHECK_THROWS_AS(frame_encode(30, 1), Error);
  CHECK_THROWS_AS(frame_encode(0xFE, 1), Error);
  CHECK_NOTHROW(frame_encode(29, 1, Bytes(200)));
  CHECK_THROWS_AS(frame_encode(29, 1, Bytes(201)), Error);
}

TEST_CASE("decode error classification") {
  const auto good = from_hex("AA 05 01 00 5D 14");
  auto bad = good;
  bad[4] ^= 0x01;
  CHECK(decode_error(bad) == Errc::CrcMismatch);
  CHECK(decode_error(ByteView(good).first(5)) == Errc::Truncated);
  bad = good;
  bad[0] = 0xAB;
  CHECK(decode_error(bad) == Errc::Malformed);
  CHECK(decode_error(from_hex("AA 05 01 00 5D 14 00")) == Errc::Malformed);
  // Valid CRC over an address outside 0..29 and 0xFF.
  Bytes bad_addr{0xAA, 0x40, 0x01, 0x00};
  put_le(bad_addr, crc16_ccitt_false(ByteView(bad_addr).subspan(1)));
  CHECK(decode_error(bad_addr) == Errc::BadAddress);
}

TEST_CASE("property: encode/decode roundtrip") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 2000; ++i) {
    const auto f = random_frame(rng);
    REQUIRE(frame_decode(frame_encode(f)) == f);
  }
}

TEST_CASE("decoder resynchronizes after line noise") {
  const auto ping = from_hex("AA 05 01 00 5D 14");
  Bytes stream{0x00, 0x00};
  append(stream, ping);
  auto frames = decode_stream(stream);
  REQUIRE(frames.size() == 1);
  CHECK(frames[0] == Frame{5, 1, {}});

  // A stray start byte in front of a valid frame.
  stream = {0xAA, 0x11, 0xAA};
  append(stream, ping);
  frames = decode_stream(stream);
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].addr == 5);
}

TEST_CASE("decoder handles byte-at-a-time delivery") {
  std::mt19937_64 rng(13);
  std::vector<Frame> sent;
  Bytes stream;
  for (int i = 0; i < 50; ++i) {
    sent.push_back(random_frame(rng));
    append(stream, frame_encode(sent.back()));
  }
  FrameDecoder dec;
  std::vector<Frame> got;
  for (auto b : stream) {
    dec.feed(ByteView(&b, 1));
    while (auto f = dec.next()) got.push_back(*f);
  }
  CHECK(got == sent);
  CHECK(dec.discarded() == 0);
}

TEST_CASE("fuzz: garbage never crashes and valid frames are still recovered") {
  std::mt19937_64 rng(14);
  for (int round = 0; round < 300; ++round) {
    Bytes stream;
    std::vector<Frame> planted;
    for (int k = 0; k < 5; ++k) {
      Bytes noise(rng() % 12);
      for (auto& b : noise) b = static_cast<std::uint8_t>(rng() % 0xAA);  // never a start byte
      append(stream, noise);
      planted.push_back(random_frame(rng));
      append(stream, frame_encode(planted.back()));
    }
    REQUIRE(decode_stream(stream) == planted);

    Bytes junk(rng() % 400);
    for (auto& b : junk) b = static_cast<std::uint8_t>(rng());
    for (const auto& f : decode_stream(junk)) {
      REQUIRE(frame_encode(f).size() == f.payload.size() + kFrameOverhead);
    }
  }
}

TEST_CASE("every single-byte corruption of a golden frame is rejected") {
  for (const auto& fx : fixtures::frame_fixtures()) {
    const auto good = from_hex(fx.frame_hex);
    for (std::size_t pos = 0; pos < good.size(); ++pos) {
      for (int v = 0; v < 256; ++v) {
        if (v == good[pos]) continue;
        auto bad = good;
        bad[pos] = static_cast<std::uint8_t>(v);
        bool rejected = false;
        try {
          frame_decode(bad);
        } catch (const Error&) {
          rejected = true;
        }
        REQUIRE_MESSAGE(rejected, fx.name << " pos " << pos << " value " << v);
      }
    }
  }
}
