#include "rfidtrace/api/journal.hpp"

#include <algorithm>
#include <tuple>

#include "rfidtrace/api/error.hpp"
#include "rfidtrace/store/records.hpp"

namespace rfidtrace::api {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::InvalidQuery, what); }

std::uint64_t unsigned_field(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    invalid(std::string(key) + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace

JournalQuery journal_query_from_json(const json& j) {
  if (j.is_null()) return {};
  if (!j.is_object()) invalid("query must be an object");
  JournalQuery q;
  for (const auto& [k, v] : j.items()) {
    if (v.is_null()) continue;
    if (k == "station") {
      const auto s = unsigned_field(j, "station");
      if (s > 255) invalid("station must be 0..255");
      q.station = static_cast<std::uint8_t>(s);
    } else if (k == "kind") {
      if (!v.is_string()) invalid("kind must be a string");
      q.kind = net::parse_event_kind(v.get<std::string>());
      if (!q.kind) invalid("unknown event kind '" + v.get<std::string>() + "'");
    } else if (k == "uid") {
      if (!v.is_string()) invalid("uid must be a hex string");
      try {
        q.uid = rf::Uid::parse(v.get<std::string>());
      } catch (const std::exception&) {
        invalid("uid must be 16 hex digits");
      }
    } else if (k == "from_us") {
      q.from_us = unsigned_field(j, "from_us");
    } else if (k == "to_us") {
      q.to_us = unsigned_field(j, "to_us");
    } else if (k == "offset") {
      q.offset = unsigned_field(j, "offset");
    } else if (k == "limit") {
      q.limit = unsigned_field(j, "limit");
    } else if (k == "order") {
      const auto order = v.is_string() ? v.get<std::string>() : "";
      if (order != "asc" && order != "desc") invalid("order must be \"asc\" or \"desc\"");
      q.descending = order == "desc";
    } else {
      invalid("unknown query key '" + k + "'");
    }
  }
  validate(q);
  return q;
}

void validate(const JournalQuery& q) {
  if (q.limit < 1 || q.limit > kMaxJournalLimit) invalid("limit must be 1..1000");
  if (q.from_us && q.to_us && *q.from_us > *q.to_us) invalid("from_us is after to_us");
}

JournalPage run_journal_query(const JournalQuery& q, const store::Table& events) {
  validate(q);
  std::vector<JournalEntry> hits;
  for (const auto& [key, row] : events.rows) {
    auto e = store::event_from_row(row);
    if (q.station && e.station != *q.station) continue;
    if (q.kind && e.kind != *q.kind) continue;
    if (q.uid && e.uid != q.uid) continue;
    if (q.from_us && e.sim_timestamp_us < *q.from_us) continue;
    if (q.to_us && e.sim_timestamp_us > *q.to_us) continue;
    JournalEntry entry{std::move(e), static_cast<std::uint64_t>(std::get<std::int64_t>(row[5])), std::nullopt};
    if (const auto* d = std::get_if<std::string>(&row[6])) entry.detail = *d;
    hits.push_back(std::move(entry));
  }
  std::sort(hits.begin(), hits.end(), [&](const JournalEntry& a, const JournalEntry& b) {
    if (a.event.sim_timestamp_us != b.event.sim_timestamp_us) {
      return q.descending ? a.event.sim_timestamp_us > b.event.sim_timestamp_us
                          : a.event.sim_timestamp_us < b.event.sim_timestamp_us;
    }
    return std::tie(a.event.station, a.event.seq) < std::tie(b.event.station, b.event.seq);
  });
  JournalPage page;
  page.total = hits.size();
  if (q.offset < hits.size()) {
    const auto end = q.offset + std::min(q.limit, hits.size() - q.offset);
    page.events.assign(std::make_move_iterator(hits.begin() + static_cast<std::ptrdiff_t>(q.offset)),
                       std::make_move_iterator(hits.begin() + static_cast<std::ptrdiff_t>(end)));
  }
  return page;
}

json to_json(const JournalEntry& e) {
  json j{{"station", e.event.station},
         {"seq", e.event.seq},
         {"kind", std::string(net::to_string(e.event.kind))},
         {"uid", e.event.uid ? json(e.event.uid->hex()) : json(nullptr)},
         {"sim_timestamp_us", e.event.sim_timestamp_us},
         {"ingest_time_us", e.ingest_time}};
  j["detail"] = e.detail ? json(*e.detail) : json(nullptr);
  return j;
}

json to_json(const JournalPage& page) {
  json events = json::array();
  for (const auto& e : page.events) events.push_back(to_json(e));
  return {{"total", page.total}, {"events", std::move(events)}};
}

}  // namespace rfidtrace::api
