#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfidtrace/sync/compact.hpp"

namespace rfidtrace::sync {

// Every message on the sync link:
//
//   u32 length (type byte + body), u8 type, body
//
// Integers are little-endian. `str8` is u8 length + bytes, `str16` is u16
// length + bytes, `blob` is u32 length + bytes.
//
//   type  name          body
//   0x01  HELLO         u16 version, str8 expected device id (may be empty)
//   0x02  PUSH_TABLE    str8 table, blob compact image
//   0x03  PULL_TABLE    str8 table
//   0x04  SET_BASE      str8 table, u64 revision
//   0x05  END           digest[32]
//   0x06  BEGIN         u8 count, count x str8 table
//   0x10  FILE_PUT      str16 path, digest[32], blob data
//   0x11  FILE_GET      str16 path
//   0x12  FILE_DELETE   str16 path
//   0x13  MKDIR         str16 path
//   0x14  RMDIR         str16 path
//   0x15  STAT          str16 path
//   0x81  MANIFEST      str8 device id, u8 count, per table:
//                       str8 table, u8 present, u64 revision, u64 modified_at,
//                       u8 has_base, u64 base, digest[32]
//   0x82  ACK           u8 status, str16 text
//   0x83  DATA          digest[32], blob bytes
//   0x84  STAT_INFO     u8 status, u8 is_dir, u64 size, u64 mtime_us
//
// Digests are BLAKE2b-256. The END digest covers every encoded message of the
// session from BEGIN up to, not including, END.

inline constexpr std::uint16_t kSyncVersion = 1;
inline constexpr std::uint32_t kMaxMessage = 64u << 20;

enum class MsgType : std::uint8_t {
  Hello = 0x01,
  PushTable = 0x02,
  PullTable = 0x03,
  SetBase = 0x04,
  End = 0x05,
  Begin = 0x06,
  FilePut = 0x10,
  FileGet = 0x11,
  FileDelete = 0x12,
  MakeDir = 0x13,
  RemoveDir = 0x14,
  Stat = 0x15,
  Manifest = 0x81,
  Ack = 0x82,
  Data = 0x83,
  StatInfo = 0x84,
};

enum class Status : std::uint8_t {
  Ok = 0,
  NotFound = 1,
  AlreadyExists = 2,
  QuotaExceeded = 3,
  Rejected = 4,
  Protocol = 5,
  Io = 6,
};

std::string_view to_string(Status s);

struct Message {
  MsgType type = MsgType::Ack;
  Bytes body;
};

Bytes encode_message(const Message& m);
/// Size of the whole encoded message.
inline std::size_t encoded_size(const Message& m) { return 5 + m.body.size(); }

Digest blake2b(ByteView data);

/// Incremental BLAKE2b-256 over encoded messages.
class SessionDigest {
 public:
  SessionDigest() { reset(); }
  void reset();
  void add(ByteView encoded);
  Digest value() const;

 private:
  alignas(64) std::uint8_t state_[384];
};

class BodyWriter {
 public:
  BodyWriter& u8(std::uint8_t v);
  BodyWriter& u16(std::uint16_t v);
  BodyWriter& u64(std::uint64_t v);
  BodyWriter& str8(std::string_view s);
  BodyWriter& str16(std::string_view s);
  BodyWriter& blob(ByteView b);
  BodyWriter& digest(const Digest& d);
  Message done(MsgType type) { return {type, std::move(out_)}; }

 private:
  Bytes out_;
};

/// Bounds-checked reader; throws Protocol.
class BodyReader {
 public:
  explicit BodyReader(ByteView body) : in_(body) {}
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint64_t u64();
  std::string str8();
  std::string str16();
  Bytes blob();
  Digest digest();
  /// Throws Protocol when bytes remain.
  void finish() const;

 private:
  void need(std::size_t n) const;
  ByteView in_;
  std::size_t pos_ = 0;
};

struct ManifestEntry {
  std::string table;
  bool present = false;
  std::uint64_t revision = 0;
  std::uint64_t modified_at = 0;
  std::optional<std::uint64_t> base;
  Digest digest{};
};

struct Manifest {
  std::string device_id;
  std::vector<ManifestEntry> tables;
};

Message encode_manifest(const Manifest& m);
Manifest decode_manifest(ByteView body);

Message make_ack(Status status, std::string_view text = {});
struct Ack {
  Status status = Status::Ok;
  std::string text;
};
Ack decode_ack(const Message& m);

struct StatInfo {
  Status status = Status::Ok;
  bool is_dir = false;
  std::uint64_t size = 0;
  std::uint64_t mtime_us = 0;
};

Message encode_stat(const StatInfo& s);
StatInfo decode_stat(ByteView body);

}  // namespace rfidtrace::sync
