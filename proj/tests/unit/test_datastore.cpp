#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "rfidtrace/store/datastore.hpp"
#include "rfidtrace/store/persistence.hpp"
#include "support/store_gen.hpp"
#include "support/temp_dir.hpp"

using namespace rfidtrace;
using namespace rfidtrace::store;

namespace {

Row transponder(const std::string& uid, std::int64_t template_id) {
  return Row{uid, template_id, std::int64_t{1}, Bytes{1, 2, 3}, std::int64_t{3}, std::int64_t{1000}};
}

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a store error");
  return Errc::Io;
}

std::uint64_t fake_time = 0;
std::uint64_t fake_clock() { return ++fake_time; }

/// Performs `n` random mutations and returns the journal the sink saw.
void mutate_with_sink(Datastore& store, std::mt19937_64& rng, int n) {
  const auto& schemas = builtin_schemas();
  for (int i = 0; i < n; ++i) {
    const auto& schema = schemas[rng() % schemas.size()];
    const auto who = Actor::as(Role::Admin);
    const auto pick = rng() % 10;
    if (pick < 7) {
      store.upsert(who, schema.name, gen::random_row(rng, schema));
    } else if (pick < 9) {
      const auto rows = store.rows(who, schema.name);
      if (rows.empty()) continue;
      store.remove(who, schema.name, schema.key_of(rows[rng() % rows.size()]));
    } else {
      std::vector<Row> rows;
      std::set<Key, KeyLess> keys;
      for (int k = 0; k < 5; ++k) {
        auto r = gen::random_row(rng, schema);
        if (keys.insert(schema.key_of(r)).second) rows.push_back(r);
      }
      store.replace(who, schema.name, rows);
    }
  }
}

std::vector<Change> mutate(Datastore& store, std::mt19937_64& rng, int n) {
  std::vector<Change> journal;
  store.set_change_sink([&](const Change& c, const TableSet&) { journal.push_back(c); });
  mutate_with_sink(store, rng, n);
  store.set_change_sink({});
  return journal;
}

}  // namespace

TEST_CASE("upsert then read gives the same record") {
  Datastore store;
  const auto admin = Actor::as(Role::Admin);
  const auto row = transponder("E000000000000001", 7);
  CHECK(store.upsert(admin, tables::kTransponders, row) == 1);
  const auto got = store.get(admin, tables::kTransponders, Key{std::string("E000000000000001")});
  REQUIRE(got);
  CHECK(same(*got, row));
  CHECK(store.upsert(admin, tables::kTransponders, transponder("E000000000000002", 7)) == 2);
  CHECK(store.revision(tables::kTransponders) == 2);
  CHECK(store.revision(tables::kEvents) == 0);
}

TEST_CASE("insert, delete and type errors") {
  Datastore store;
  const auto op = Actor::as(Role::Operator);
  store.insert(op, tables::kTransponders, transponder("A", 1));
  CHECK(error_of([&] { store.insert(op, tables::kTransponders, transponder("A", 2)); }) == Errc::DuplicateKey);
  CHECK(error_of([&] { store.remove(op, tables::kTransponders, Key{std::string("B")}); }) == Errc::NotFound);
  CHECK(store.revision(tables::kTransponders) == 1);
  CHECK(store.remove(op, tables::kTransponders, Key{std::string("A")}) == 2);
  CHECK(error_of([&] { store.upsert(op, tables::kTransponders, Row{std::string("A")}); }) == Errc::TypeMismatch);
  CHECK(error_of([&] {
          store.upsert(op, tables::kStations, Row{std::string("x"), std::string("n"), std::int64_t{0}, std::string("ok")});
        }) == Errc::TypeMismatch);
  CHECK(error_of([&] { store.rows(op, "nope"); }) == Errc::UnknownTable);
}

TEST_CASE("viewer delete is refused and leaves the revision alone") {
  Datastore store;
  store.upsert(Actor::as(Role::Admin), tables::kTransponders, transponder("A", 1));
  CHECK(error_of([&] { store.remove(Actor::as(Role::Viewer), tables::kTransponders, Key{std::string("A")}); }) ==
        Errc::Unauthorized);
  CHECK(store.revision(tables::kTransponders) == 1);
}

TEST_CASE("authorization matrix covers every role, table and operation") {
  // Independent statement of the policy, one line per role.
  const std::map<Role, std::pair<bool, bool>> ordinary{
      {Role::Viewer, {true, false}}, {Role::Operator, {true, true}}, {Role::Admin, {true, true}}};
  const std::map<Role, std::pair<bool, bool>> users{
      {Role::Viewer, {false, false}}, {Role::Operator, {false, false}}, {Role::Admin, {true, true}}};

  std::mt19937_64 rng(1);
  int cells = 0;
  for (auto role : {Role::Viewer, Role::Operator, Role::Admin}) {
    for (const auto& schema : builtin_schemas()) {
      const auto& expect = schema.name == tables::kUsers ? users.at(role) : ordinary.at(role);
      for (auto access : {Access::Read, Access::Upsert, Access::Delete}) {
        const bool want = access == Access::Read ? expect.first : expect.second;
        CAPTURE(to_string(role));
        CAPTURE(schema.name);
        CAPTURE(to_string(access));
        CHECK(allowed(role, schema.name, access) == want);

        // And the store enforces it.
        Datastore store;
        const auto row = gen::random_row(rng, schema);
        store.upsert(Actor::internal(), schema.name, row);
        const auto before = store.revision(schema.name);
        bool ok = true;
        try {
          switch (access) {
            case Access::Read: store.rows(Actor::as(role), schema.name); break;
            case Access::Upsert: store.upsert(Actor::as(role), schema.name, row); break;
            case Access::Delete: store.remove(Actor::as(role), schema.name, schema.key_of(row)); break;
          }
        } catch (const Error& e) {
          CHECK(e.code() == Errc::Unauthorized);
          ok = false;
        }
        CHECK(ok == want);
        if (!ok) CHECK(store.revision(schema.name) == before);
        ++cells;
      }
    }
  }
  CHECK(cells == 3 * 7 * 3);
}

TEST_CASE("property: journal replay reproduces the store byte for byte") {
  std::mt19937_64 rng(99);
  Datastore store(TableSet::central(), fake_clock);
  const auto journal = mutate(store, rng, 1000);
  CHECK(journal.size() > 900);

  TableSet replayed = TableSet::central();
  for (const auto& c : journal) {
    // Through the text form, as a journal file would carry it.
    const auto text = change_to_json(c).dump();
    replayed.apply(change_from_json(nlohmann::json::parse(text), replayed.table(c.table).schema));
  }
  CHECK(replayed.canonical() == store.snapshot().canonical());
  CHECK(TableSet::from_json(nlohmann::json::parse(replayed.canonical())).canonical() == replayed.canonical());
}

TEST_CASE("property: revisions strictly increase and equal revisions mean equal tables") {
  std::mt19937_64 rng(5);
  Datastore store(TableSet::central(), fake_clock);
  auto table_dump = [](const Table& t) {
    std::string out;
    for (const auto& [_, r] : t.rows) {
      for (const auto& v : r) out += value_to_json(v).dump() + ",";
      out += ";";
    }
    return out;
  };
  std::map<std::pair<std::string, std::uint64_t>, std::string> live;
  std::vector<Change> journal;
  std::map<std::string, std::uint64_t> last;
  store.set_change_sink([&](const Change& c, const TableSet& t) {
    REQUIRE(c.revision == last[c.table] + 1);
    last[c.table] = c.revision;
    live[{c.table, c.revision}] = table_dump(t.table(c.table));
    journal.push_back(c);
  });
  mutate_with_sink(store, rng, 400);

  TableSet replayed = TableSet::central();
  for (const auto& c : journal) {
    replayed.apply(c);
    REQUIRE(table_dump(replayed.table(c.table)) == live.at({c.table, c.revision}));
  }
}

TEST_CASE("a failing sink rolls the change back") {
  Datastore store;
  store.upsert(Actor::internal(), tables::kTransponders, transponder("A", 1));
  const auto before = store.snapshot().canonical();
  store.set_change_sink([](const Change&, const TableSet&) { throw std::runtime_error("disk full"); });
  CHECK_THROWS_AS(store.upsert(Actor::internal(), tables::kTransponders, transponder("A", 2)), std::runtime_error);
  CHECK_THROWS_AS(store.upsert(Actor::internal(), tables::kTransponders, transponder("B", 2)), std::runtime_error);
  CHECK_THROWS_AS(store.remove(Actor::internal(), tables::kTransponders, Key{std::string("A")}), std::runtime_error);
  CHECK_THROWS_AS(store.replace(Actor::internal(), tables::kTransponders, {}), std::runtime_error);
  CHECK(store.snapshot().canonical() == before);
}

TEST_CASE("concurrent readers and writers") {
  Datastore store;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 200; ++i) {
        store.upsert(Actor::internal(), tables::kTransponders, transponder("T" + std::to_string(t * 1000 + i), t));
        store.rows(Actor::as(Role::Viewer), tables::kTransponders);
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(store.revision(tables::kTransponders) == 800);
  CHECK(store.rows(Actor::internal(), tables::kTransponders).size() == 800);
}

TEST_CASE("store directory persists and reloads") {
  test::TempDir dir;
  std::mt19937_64 rng(8);
  std::string expected;
  {
    StoreDirectory sd(dir.path(), StoreOptions{std::nullopt, {}, false}, fake_clock);
    CHECK(error_of([&] { StoreDirectory again(dir.path(), StoreOptions{}, fake_clock); }) == Errc::Io);
    mutate_with_sink(sd.store(), rng, 300);
    expected = sd.store().snapshot().canonical();
  }
  CHECK(load_store(dir.path(), {}).canonical() == expected);

  test::TempDir dir2;
  {
    StoreDirectory sd(dir2.path(), StoreOptions{std::nullopt, {}, false}, fake_clock);
    for (int i = 0; i < 200; ++i) {
      const auto& schema = builtin_schemas()[rng() % builtin_schemas().size()];
      sd.store().upsert(Actor::internal(), schema.name, gen::random_row(rng, schema));
      if (i == 120) sd.checkpoint();
    }
    expected = sd.store().snapshot().canonical();
  }
  {
    StoreDirectory sd(dir2.path(), StoreOptions{std::nullopt, {}, false}, fake_clock);
    CHECK(sd.store().snapshot().canonical() == expected);
  }
  CHECK(load_store(dir2.path(), {}).canonical() == expected);

  // An interrupted append is ignored and trimmed.
  {
    std::ofstream j(dir2.path() / "journal.jsonl", std::ios::app);
    j << R"({"rev":999,"table":"stations","op":"ups)";
  }
  {
    StoreDirectory sd(dir2.path(), StoreOptions{std::nullopt, {}, false}, fake_clock);
    CHECK(sd.store().snapshot().canonical() == expected);
    sd.store().upsert(Actor::internal(), tables::kStations,
                      Row{std::int64_t{3}, std::string("dock"), std::int64_t{0}, std::string("ok")});
    expected = sd.store().snapshot().canonical();
  }
  CHECK(load_store(dir2.path(), {}).canonical() == expected);
}

TEST_CASE("a crash between snapshot and journal reset replays cleanly") {
  test::TempDir dir;
  std::string expected;
  {
    StoreDirectory sd(dir.path(), StoreOptions{std::nullopt, {}, false}, fake_clock);
    for (int i = 0; i < 5; ++i) {
      sd.store().upsert(Actor::internal(), tables::kTransponders, transponder("U" + std::to_string(i), i));
    }
    expected = sd.store().snapshot().canonical();
    // Write the snapshot the way checkpoint does, but keep the journal.
    replace_file(dir.path() / "snapshot.json", as_bytes(expected), false);
  }
  CHECK(load_store(dir.path(), {}).canonical() == expected);
}

TEST_CASE("corrupt journal records are reported with their line") {
  test::TempDir dir;
  {
    std::ofstream j(dir.path() / "journal.jsonl");
    j << "{\"rev\":1,\"table\":\"stations\",\"op\":\"upsert\",\"row\":[1,\"a\",0,\"ok\"],\"key\":[1],\"at\":5}\n";
    j << "not json\n";
  }
  try {
    load_store(dir.path(), {});
    FAIL("corrupt journal accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Corrupt);
    CHECK(std::string(e.what()).find("journal.jsonl:2") != std::string::npos);
  }
}
