#include "rfidtrace/sync/wire.hpp"

#include <sodium.h>

#include <cstring>

namespace rfidtrace::sync {

static_assert(sizeof(crypto_generichash_state) <= 384);

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::NotFound: return "not found";
    case Status::AlreadyExists: return "already exists";
    case Status::QuotaExceeded: return "quota exceeded";
    case Status::Rejected: return "rejected";
    case Status::Protocol: return "protocol error";
    case Status::Io: return "io error";
  }
  return "unknown";
}

Bytes encode_message(const Message& m) {
  if (m.body.size() + 1 > kMaxMessage) throw Error(Errc::Protocol, "message too large");
  Bytes out;
  out.reserve(encoded_size(m));
  put_le(out, static_cast<std::uint32_t>(m.body.size() + 1));
  out.push_back(static_cast<std::uint8_t>(m.type));
  append(out, m.body);
  return out;
}

Digest blake2b(ByteView data) {
  Digest d{};
  crypto_generichash(d.data(), d.size(), data.data(), data.size(), nullptr, 0);
  return d;
}

void SessionDigest::reset() {
  crypto_generichash_init(reinterpret_cast<crypto_generichash_state*>(state_), nullptr, 0, 32);
}

void SessionDigest::add(ByteView encoded) {
  crypto_generichash_update(reinterpret_cast<crypto_generichash_state*>(state_), encoded.data(), encoded.size());
}

Digest SessionDigest::value() const {
  crypto_generichash_state copy;
  std::memcpy(&copy, state_, sizeof copy);
  Digest d{};
  crypto_generichash_final(&copy, d.data(), d.size());
  return d;
}

BodyWriter& BodyWriter::u8(std::uint8_t v) {
  out_.push_back(v);
  return *this;
}

BodyWriter& BodyWriter::u16(std::uint16_t v) {
  put_le(out_, v);
  return *this;
}

BodyWriter& BodyWriter::u64(std::uint64_t v) {
  put_le(out_, v);
  return *this;
}

BodyWriter& BodyWriter::str8(std::string_view s) {
  if (s.size() > 255) throw Error(Errc::Protocol, "string longer than 255 bytes");
  out_.push_back(static_cast<std::uint8_t>(s.size()));
  append(out_, as_bytes(s));
  return *this;
}

BodyWriter& BodyWriter::str16(std::string_view s) {
  if (s.size() > 65535) throw Error(Errc::Protocol, "string longer than 65535 bytes");
  put_le(out_, static_cast<std::uint16_t>(s.size()));
  append(out_, as_bytes(s));
  return *this;
}

BodyWriter& BodyWriter::blob(ByteView b) {
  put_le(out_, static_cast<std::uint32_t>(b.size()));
  append(out_, b);
  return *this;
}

BodyWriter& BodyWriter::digest(const Digest& d) {
  append(out_, d);
  return *this;
}

void BodyReader::need(std::size_t n) const {
  if (pos_ + n > in_.size()) throw Error(Errc::Protocol, "message body truncated");
}

std::uint8_t BodyReader::u8() {
  need(1);
  return in_[pos_++];
}

std::uint16_t BodyReader::u16() {
  need(2);
  auto v = get_le<std::uint16_t>(in_, pos_);
  pos_ += 2;
  return v;
}

std::uint64_t BodyReader::u64() {
  need(8);
  auto v = get_le<std::uint64_t>(in_, pos_);
  pos_ += 8;
  return v;
}

std::string BodyReader::str8() {
  const auto n = u8();
  need(n);
  std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
  pos_ += n;
  return s;
}

std::string BodyReader::str16() {
  const auto n = u16();
  need(n);
  std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
  pos_ += n;
  return s;
}

Bytes BodyReader::blob() {
  need(4);
  const auto n = get_le<std::uint32_t>(in_, pos_);
  pos_ += 4;
  need(n);
  Bytes b(in_.begin() + static_cast<std::ptrdiff_t>(pos_), in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
  pos_ += n;
  return b;
}

Digest BodyReader::digest() {
  need(32);
  Digest d{};
  std::memcpy(d.data(), in_.data() + pos_, d.size());
  pos_ += d.size();
  return d;
}

void BodyReader::finish() const {
  if (pos_ != in_.size()) throw Error(Errc::Protocol, "trailing bytes in message body");
}

Message encode_manifest(const Manifest& m) {
  if (m.tables.size() > 255) throw Error(Errc::Protocol, "too many tables in manifest");
  BodyWriter w;
  w.str8(m.device_id).u8(static_cast<std::uint8_t>(m.tables.size()));
  for (const auto& e : m.tables) {
    w.str8(e.table).u8(e.present ? 1 : 0).u64(e.revision).u64(e.modified_at);
    w.u8(e.base ? 1 : 0).u64(e.base.value_or(0)).digest(e.digest);
  }
  return w.done(MsgType::Manifest);
}

Manifest decode_manifest(ByteView body) {
  BodyReader r(body);
  Manifest m;
  m.device_id = r.str8();
  const auto n = r.u8();
  for (std::size_t i = 0; i < n; ++i) {
    ManifestEntry e;
    e.table = r.str8();
    e.present = r.u8() != 0;
    e.revision = r.u64();
    e.modified_at = r.u64();
    const bool has_base = r.u8() != 0;
    const auto base = r.u64();
    if (has_base) e.base = base;
    e.digest = r.digest();
    m.tables.push_back(std::move(e));
  }
  r.finish();
  return m;
}

Message make_ack(Status status, std::string_view text) {
  return BodyWriter().u8(static_cast<std::uint8_t>(status)).str16(text).done(MsgType::Ack);
}

Ack decode_ack(const Message& m) {
  if (m.type != MsgType::Ack) throw Error(Errc::Protocol, "expected ACK");
  BodyReader r(m.body);
  Ack a;
  const auto s = r.u8();
  if (s > static_cast<std::uint8_t>(Status::Io)) throw Error(Errc::Protocol, "bad ACK status");
  a.status = static_cast<Status>(s);
  a.text = r.str16();
  r.finish();
  return a;
}

Message encode_stat(const StatInfo& s) {
  return BodyWriter()
      .u8(static_cast<std::uint8_t>(s.status))
      .u8(s.is_dir ? 1 : 0)
      .u64(s.size)
      .u64(s.mtime_us)
      .done(MsgType::StatInfo);
}

StatInfo decode_stat(ByteView body) {
  BodyReader r(body);
  StatInfo s;
  const auto st = r.u8();
  if (st > static_cast<std::uint8_t>(Status::Io)) throw Error(Errc::Protocol, "bad STAT status");
  s.status = static_cast<Status>(st);
  s.is_dir = r.u8() != 0;
  s.size = r.u64();
  s.mtime_us = r.u64();
  r.finish();
  return s;
}

}  // namespace rfidtrace::sync
