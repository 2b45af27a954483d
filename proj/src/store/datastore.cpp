#include "rfidtrace/store/datastore.hpp"

#include <chrono>
#include <mutex>

namespace rfidtrace::store {

namespace {

std::uint64_t wall_clock_us() {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(
                                        std::chrono::system_clock::now().time_since_epoch())
                                        .count());
}

}  // namespace

Datastore::Datastore(TableSet tables, Clock clock)
    : tables_(std::move(tables)), clock_(clock ? std::move(clock) : Clock(wall_clock_us)) {}

void Datastore::set_change_sink(ChangeSink sink) {
  std::unique_lock lock(mutex_);
  sink_ = std::move(sink);
}

void Datastore::check(const Actor& who, std::string_view table, Access access) const {
  tables_.table(table);  // UnknownTable first
  if (who.system || allowed(who.role, table, access)) return;
  throw Error(Errc::Unauthorized, std::string(to_string(who.role)) + " may not " +
                                      std::string(to_string(access)) + " " + std::string(table));
}

std::uint64_t Datastore::commit(Change change) {
  auto& t = tables_.table(change.table);
  const auto revision = t.revision;
  const auto modified_at = t.modified_at;
  // Enough of the old state to undo the change if the sink refuses it.
  std::optional<Row> previous;
  std::map<Key, Row, KeyLess> previous_rows;
  if (change.op == ChangeOp::Replace) {
    previous_rows = t.rows;
  } else if (const auto* r = t.find(change.key)) {
    previous = *r;
  }

  change.revision = revision + 1;
  // Stamps never go backwards within a table, even if the clock does.
  change.at = std::max(clock_(), modified_at);
  tables_.apply(change);
  if (sink_) {
    try {
      sink_(change, tables_);
    } catch (...) {
      if (change.op == ChangeOp::Replace) {
        t.rows = std::move(previous_rows);
      } else if (previous) {
        t.rows[change.key] = std::move(*previous);
      } else {
        t.rows.erase(change.key);
      }
      t.revision = revision;
      t.modified_at = modified_at;
      throw;
    }
  }
  return change.revision;
}

std::uint64_t Datastore::upsert(const Actor& who, std::string_view table, Row row) {
  std::unique_lock lock(mutex_);
  check(who, table, Access::Upsert);
  const auto& schema = tables_.table(table).schema;
  schema.check_row(row);
  Change c;
  c.table = std::string(table);
  c.op = ChangeOp::Upsert;
  c.key = schema.key_of(row);
  c.row = std::move(row);
  return commit(std::move(c));
}

std::uint64_t Datastore::insert(const Actor& who, std::string_view table, Row row) {
  std::unique_lock lock(mutex_);
  check(who, table, Access::Upsert);
  const auto& t = tables_.table(table);
  t.schema.check_row(row);
  auto key = t.schema.key_of(row);
  if (t.find(key)) throw Error(Errc::DuplicateKey, std::string(table));
  Change c;
  c.table = std::string(table);
  c.op = ChangeOp::Upsert;
  c.key = std::move(key);
  c.row = std::move(row);
  return commit(std::move(c));
}

std::uint64_t Datastore::remove(const Actor& who, std::string_view table, const Key& key) {
  std::unique_lock lock(mutex_);
  check(who, table, Access::Delete);
  const auto& t = tables_.table(table);
  t.schema.check_key(key);
  if (!t.find(key)) throw Error(Errc::NotFound, std::string(table));
  Change c;
  c.table = std::string(table);
  c.op = ChangeOp::Delete;
  c.key = key;
  return commit(std::move(c));
}

std::uint64_t Datastore::replace(const Actor& who, std::string_view table, std::vector<Row> rows,
                                 std::optional<std::uint64_t> expect_revision) {
  std::unique_lock lock(mutex_);
  check(who, table, Access::Upsert);
  check(who, table, Access::Delete);
  const auto& t = tables_.table(table);
  if (expect_revision && t.revision != *expect_revision) {
    throw Error(Errc::Corrupt, std::string(table) + " changed concurrently");
  }
  Change c;
  c.table = std::string(table);
  c.op = ChangeOp::Replace;
  c.rows = std::move(rows);
  return commit(std::move(c));
}

std::optional<Row> Datastore::get(const Actor& who, std::string_view table, const Key& key) const {
  std::shared_lock lock(mutex_);
  check(who, table, Access::Read);
  const auto& t = tables_.table(table);
  t.schema.check_key(key);
  if (const auto* r = t.find(key)) return *r;
  return std::nullopt;
}

std::vector<Row> Datastore::rows(const Actor& who, std::string_view table) const {
  std::shared_lock lock(mutex_);
  check(who, table, Access::Read);
  return tables_.table(table).all_rows();
}

const TableSchema& Datastore::schema(std::string_view table) const {
  std::shared_lock lock(mutex_);
  // Schemas never change after construction, so the reference stays valid.
  return tables_.table(table).schema;
}

std::uint64_t Datastore::revision(std::string_view table) const {
  std::shared_lock lock(mutex_);
  return tables_.table(table).revision;
}

TableSet Datastore::snapshot() const {
  std::shared_lock lock(mutex_);
  return tables_;
}

void Datastore::exclusive(const std::function<void(const TableSet&)>& fn) const {
  std::unique_lock lock(mutex_);
  fn(tables_);
}

Table Datastore::table_copy(const Actor& who, std::string_view table) const {
  std::shared_lock lock(mutex_);
  check(who, table, Access::Read);
  return tables_.table(table);
}

}  // namespace rfidtrace::store
