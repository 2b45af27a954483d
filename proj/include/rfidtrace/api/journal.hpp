#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfidtrace/net/event_ring.hpp"
#include "rfidtrace/store/table_set.hpp"

namespace rfidtrace::api {

inline constexpr std::size_t kMaxJournalLimit = 1000;

/// Event journal query. Filters are conjunctive; the time range is inclusive
/// and applies to the simulated timestamp.
struct JournalQuery {
  std::optional<std::uint8_t> station;
  std::optional<net::EventKind> kind;
  std::optional<rf::Uid> uid;
  std::optional<std::uint64_t> from_us;
  std::optional<std::uint64_t> to_us;
  std::size_t offset = 0;
  std::size_t limit = 100;
  bool descending = false;
};

/// Keys: station, kind, uid, from_us, to_us, offset, limit, order ("asc" |
/// "desc"). Throws InvalidQuery.
JournalQuery journal_query_from_json(const nlohmann::json& j);
void validate(const JournalQuery& q);

struct JournalEntry {
  net::EventRecord event;
  std::uint64_t ingest_time = 0;
  std::optional<std::string> detail;
};

struct JournalPage {
  std::size_t total = 0;
  std::vector<JournalEntry> events;
};

/// Sorted by simulated timestamp (ascending or descending), ties by
/// (station, seq) ascending; `total` counts the whole filtered set.
JournalPage run_journal_query(const JournalQuery& q, const store::Table& events);

nlohmann::json to_json(const JournalEntry& e);
nlohmann::json to_json(const JournalPage& page);

}  // namespace rfidtrace::api
