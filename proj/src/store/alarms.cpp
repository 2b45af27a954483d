#include "rfidtrace/store/alarms.hpp"

namespace rfidtrace::store {

using nlohmann::json;

std::string_view to_string(TriggerKind kind) {
  switch (kind) {
    case TriggerKind::WatchlistSeen: return "watchlist_seen";
    case TriggerKind::StationSilent: return "station_silent";
    case TriggerKind::EventBufferOverrun: return "event_buffer_overrun";
  }
  return "?";
}

std::optional<TriggerKind> parse_trigger(std::string_view name) {
  if (name == "watchlist_seen") return TriggerKind::WatchlistSeen;
  if (name == "station_silent") return TriggerKind::StationSilent;
  if (name == "event_buffer_overrun") return TriggerKind::EventBufferOverrun;
  return std::nullopt;
}

json rule_to_json(const AlarmRule& rule) {
  json uids = json::array();
  for (const auto& u : rule.uids) uids.push_back(u.hex());
  json j{{"name", rule.name}, {"trigger", to_string(rule.trigger)}, {"stations", rule.stations}};
  if (rule.trigger == TriggerKind::WatchlistSeen) j["uids"] = uids;
  if (rule.trigger == TriggerKind::StationSilent) j["silent_after_us"] = rule.silent_after_us;
  return j;
}

AlarmRule rule_from_json(const json& j) {
  auto bad = [](const std::string& what) { return Error(Errc::BadRule, what); };
  if (!j.is_object()) throw bad("rule must be an object");
  for (const auto& [k, _] : j.items()) {
    if (k != "name" && k != "trigger" && k != "stations" && k != "uids" && k != "silent_after_us" &&
        k != "silent_after_s") {
      throw bad("unknown rule key '" + k + "'");
    }
  }
  AlarmRule rule;
  try {
    rule.name = j.at("name").get<std::string>();
    const auto trigger = parse_trigger(j.at("trigger").get<std::string>());
    if (!trigger) throw bad("unknown trigger '" + j["trigger"].get<std::string>() + "'");
    rule.trigger = *trigger;
    for (const auto& s : j.value("stations", json::array())) {
      const auto a = s.get<int>();
      if (a < 0 || a > 29) throw bad("station " + std::to_string(a) + " out of range");
      rule.stations.insert(static_cast<std::uint8_t>(a));
    }
    for (const auto& u : j.value("uids", json::array())) rule.uids.insert(rf::Uid::parse(u.get<std::string>()));
    if (j.contains("silent_after_us")) rule.silent_after_us = j["silent_after_us"].get<std::uint64_t>();
    if (j.contains("silent_after_s")) {
      const double s = j["silent_after_s"].get<double>();
      if (!(s > 0)) throw bad("silent_after_s must be positive");
      rule.silent_after_us = static_cast<std::uint64_t>(s * 1e6);
    }
  } catch (const json::exception& e) {
    throw bad(e.what());
  } catch (const std::invalid_argument& e) {
    throw bad(e.what());
  }
  if (rule.name.empty()) throw bad("rule without a name");
  if (rule.trigger == TriggerKind::WatchlistSeen && rule.uids.empty()) throw bad("watchlist is empty");
  if (rule.trigger != TriggerKind::WatchlistSeen && !rule.uids.empty()) throw bad("uids only apply to watchlist_seen");
  if (rule.trigger == TriggerKind::StationSilent && rule.silent_after_us == 0) {
    throw bad("station_silent needs silent_after_s or silent_after_us");
  }
  if (rule.trigger != TriggerKind::StationSilent && rule.silent_after_us != 0) {
    throw bad("silence duration only applies to station_silent");
  }
  return rule;
}

Row rule_to_row(const AlarmRule& rule) {
  auto params = rule_to_json(rule);
  params.erase("name");
  params.erase("trigger");
  return Row{rule.name, std::string(to_string(rule.trigger)), params.dump()};
}

AlarmRule rule_from_row(const Row& row) {
  json j;
  try {
    j = json::parse(std::get<std::string>(row.at(2)));
  } catch (const json::parse_error& e) {
    throw Error(Errc::BadRule, e.what());
  }
  j["name"] = std::get<std::string>(row.at(0));
  j["trigger"] = std::get<std::string>(row.at(1));
  return rule_from_json(j);
}

void AlarmEngine::set_rules(std::vector<AlarmRule> rules) {
  rules_ = std::move(rules);
  // Forget fired marks of rules that no longer exist.
  std::erase_if(fired_, [&](const auto& f) {
    return std::none_of(rules_.begin(), rules_.end(), [&](const AlarmRule& r) { return r.name == f.first; });
  });
}

bool AlarmEngine::watches(const AlarmRule& rule, std::uint8_t station) const {
  return rule.stations.empty() || rule.stations.contains(station);
}

std::vector<AlarmRaised> AlarmEngine::on_event(const net::EventRecord& event) {
  std::vector<AlarmRaised> out;
  if (event.kind == net::EventKind::Alarm) return out;
  for (const auto& rule : rules_) {
    if (!watches(rule, event.station)) continue;
    if (rule.trigger == TriggerKind::WatchlistSeen && event.kind == net::EventKind::TagEnter && event.uid &&
        rule.uids.contains(*event.uid)) {
      out.push_back({rule.name, event.station, event.uid,
                     "watchlisted tag " + event.uid->hex() + " seen at station " + std::to_string(event.station)});
    } else if (rule.trigger == TriggerKind::EventBufferOverrun &&
               event.kind == net::EventKind::BufferOverrunWarning) {
      out.push_back({rule.name, event.station, std::nullopt,
                     "event buffer of station " + std::to_string(event.station) + " above 90%"});
    }
  }
  return out;
}

void AlarmEngine::track(std::uint8_t station, std::uint64_t now_us) { last_contact_.try_emplace(station, now_us); }

void AlarmEngine::note_contact(std::uint8_t station, std::uint64_t now_us) {
  last_contact_[station] = now_us;
  std::erase_if(fired_, [&](const auto& f) { return f.second == station; });
}

std::vector<AlarmRaised> AlarmEngine::tick(std::uint64_t now_us) {
  std::vector<AlarmRaised> out;
  for (const auto& rule : rules_) {
    if (rule.trigger != TriggerKind::StationSilent) continue;
    for (const auto& [station, last] : last_contact_) {
      if (!watches(rule, station) || fired_.contains({rule.name, station})) continue;
      if (now_us >= last && now_us - last >= rule.silent_after_us) {
        fired_.insert({rule.name, station});
        out.push_back({rule.name, station, std::nullopt,
                       "station " + std::to_string(station) + " silent for " +
                           std::to_string((now_us - last) / 1000000) + " s"});
      }
    }
  }
  return out;
}

void AlarmEngine::restore(State s) {
  last_contact_ = std::move(s.last_contact);
  fired_ = std::move(s.fired);
}

}  // namespace rfidtrace::store
