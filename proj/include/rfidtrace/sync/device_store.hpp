#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rfidtrace/sync/compact.hpp"
#include "rfidtrace/sync/wire.hpp"

namespace rfidtrace::sync {

// Device directory layout:
//
//   device.json          {"device_id": ..., "capacity_bytes": ...}
//   tables/<name>.ctd    u8 has_base, u64 base revision, then a CTB1 image
//   files/               the device file area (file operations are confined here)
//
// Each table file is replaced atomically, so a table is always either its old
// or its new version.

/// The handheld's compact store and file area.
class CompactStore {
 public:
  using Clock = std::function<std::uint64_t()>;

  struct Options {
    /// Used when the directory is new; an existing device.json wins.
    std::string device_id;
    std::uint64_t capacity_bytes = 64ull << 20;
    bool durable = false;
    Clock clock;
  };

  CompactStore(std::filesystem::path dir, Options options);

  const std::string& device_id() const noexcept { return device_id_; }
  std::uint64_t capacity_bytes() const noexcept { return capacity_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }

  std::vector<std::string> names() const;
  std::optional<store::Table> table(std::string_view name) const;
  std::optional<std::uint64_t> base(std::string_view name) const;

  /// Stores `table` (narrowed on the way) with the given base revision.
  void put_table(const store::Table& table, std::optional<std::uint64_t> base);
  /// Restamps the table revision and records it as the base. Throws NotFound.
  void set_base(std::string_view name, std::uint64_t revision);

  /// Local edits on the device: bump the revision and the modification stamp.
  /// Throw NotFound for a table the device does not hold.
  std::uint64_t upsert(std::string_view name, store::Row row);
  std::uint64_t remove(std::string_view name, const store::Key& key);

  // File area. Paths are relative to files/ and may not leave it.
  Status put_file(std::string_view path, ByteView data);
  std::optional<Bytes> get_file(std::string_view path) const;
  Status delete_file(std::string_view path);
  /// AlreadyExists when present (not an error).
  Status make_dir(std::string_view path);
  /// NotFound when absent (not an error). Removes the folder and its content.
  Status remove_dir(std::string_view path);
  StatInfo stat(std::string_view path) const;
  std::uint64_t files_used() const;

 private:
  struct Entry {
    store::Table table;
    std::optional<std::uint64_t> base;
  };

  std::filesystem::path resolve(std::string_view path) const;
  void write_entry(const Entry& e) const;
  Entry& entry(std::string_view name);
  std::uint64_t stamp(const store::Table& t) const;

  std::filesystem::path dir_;
  std::string device_id_;
  std::uint64_t capacity_ = 0;
  bool durable_ = false;
  Clock clock_;
  mutable std::mutex mutex_;
  std::map<std::string, Entry, std::less<>> tables_;
};

}  // namespace rfidtrace::sync
