#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "rfidtrace/store/datastore.hpp"
#include "rfidtrace/store/sealed_container.hpp"

namespace rfidtrace::store {

// Store directory layout:
//
//   plain mode      snapshot.json   canonical TableSet (see TableSet::to_json)
//                   journal.jsonl   one change per line, applied after the snapshot
//                                   (records already covered by the snapshot's
//                                   table revision are skipped)
//   encrypted mode  store.enc       sealed container holding the canonical TableSet
//
//   both            lock            advisory lock file
//
// A trailing journal line without a newline is an interrupted append and is
// ignored. Files are replaced by writing a temporary file and renaming it.

struct StoreOptions {
  std::optional<std::string> passphrase;
  KdfParams kdf = KdfParams::interactive();
  /// fsync after each journal append and file replacement.
  bool durable = true;
};

/// Loads the TableSet found in `dir` (empty central tables if there is none).
TableSet load_store(const std::filesystem::path& dir, const StoreOptions& options);

/// Binds a Datastore to a directory: loads it, then persists every change.
/// Holds an exclusive lock on the directory for its lifetime (Io if taken).
class StoreDirectory {
 public:
  StoreDirectory(std::filesystem::path dir, StoreOptions options, Datastore::Clock clock = {});
  ~StoreDirectory();

  Datastore& store() noexcept { return *store_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }
  bool encrypted() const noexcept { return key_ != nullptr; }

  /// Plain mode: folds the journal into a fresh snapshot.
  void checkpoint();

 private:
  void persist(const Change& change, const TableSet& tables);
  void write_sealed(const TableSet& tables);

  std::filesystem::path dir_;
  StoreOptions options_;
  std::unique_ptr<SealingKey> key_;
  std::unique_ptr<Datastore> store_;
  int journal_fd_ = -1;
  int lock_fd_ = -1;
};

/// Writes `bytes` to `path` via a temporary sibling and rename.
void replace_file(const std::filesystem::path& path, ByteView bytes, bool durable);

}  // namespace rfidtrace::store
