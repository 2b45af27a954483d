#pragma once

#include <functional>
#include <optional>
#include <shared_mutex>
#include <string_view>

#include "rfidtrace/store/authorization.hpp"
#include "rfidtrace/store/table_set.hpp"

namespace rfidtrace::store {

/// Who is asking. `system` bypasses the role matrix; it is used by internal
/// producers such as event ingestion and sync, never by API callers.
struct Actor {
  Role role = Role::Viewer;
  bool system = false;

  static Actor internal() { return Actor{Role::Admin, true}; }
  static Actor as(Role r) { return Actor{r, false}; }
};

/// Thread-safe central store. Readers share; writers are serialized and every
/// mutation bumps its table's revision by exactly one and is reported to the
/// change sink before the call returns.
class Datastore {
 public:
  using Clock = std::function<std::uint64_t()>;
  using ChangeSink = std::function<void(const Change&, const TableSet&)>;

  explicit Datastore(TableSet tables = TableSet::central(), Clock clock = {});

  /// Called under the writer lock after each applied change. An exception
  /// from the sink rolls the change back and propagates.
  void set_change_sink(ChangeSink sink);

  /// Insert or replace the row with the same key. Returns the new revision.
  std::uint64_t upsert(const Actor& who, std::string_view table, Row row);
  /// Insert only: throws DuplicateKey if the key exists.
  std::uint64_t insert(const Actor& who, std::string_view table, Row row);
  /// Throws NotFound when the key is absent.
  std::uint64_t remove(const Actor& who, std::string_view table, const Key& key);
  /// Replaces the whole table content (sync pull). Bumps the revision by one.
  std::uint64_t replace(const Actor& who, std::string_view table, std::vector<Row> rows,
                        std::optional<std::uint64_t> expect_revision = std::nullopt);

  std::optional<Row> get(const Actor& who, std::string_view table, const Key& key) const;
  std::vector<Row> rows(const Actor& who, std::string_view table) const;
  const TableSchema& schema(std::string_view table) const;
  std::uint64_t revision(std::string_view table) const;

  /// Consistent copy of everything.
  TableSet snapshot() const;
  /// Copy of one table, for callers that hold Read access.
  Table table_copy(const Actor& who, std::string_view table) const;

  /// Runs `fn` with writers excluded.
  void exclusive(const std::function<void(const TableSet&)>& fn) const;

  std::uint64_t now() const { return clock_(); }

 private:
  void check(const Actor& who, std::string_view table, Access access) const;
  std::uint64_t commit(Change change);

  mutable std::shared_mutex mutex_;
  TableSet tables_;
  Clock clock_;
  ChangeSink sink_;
};

}  // namespace rfidtrace::store
