#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rfidtrace/net/event_ring.hpp"
#include "rfidtrace/store/value.hpp"

namespace rfidtrace::store {

enum class TriggerKind { WatchlistSeen, StationSilent, EventBufferOverrun };

std::string_view to_string(TriggerKind kind);
std::optional<TriggerKind> parse_trigger(std::string_view name);

struct AlarmRule {
  std::string name;
  TriggerKind trigger = TriggerKind::WatchlistSeen;
  /// WatchlistSeen: uids that raise the alarm on TAG_ENTER.
  std::set<rf::Uid> uids;
  /// Stations the rule watches; empty means all.
  std::set<std::uint8_t> stations;
  /// StationSilent: silence that trips the rule, in simulated microseconds.
  std::uint64_t silent_after_us = 0;
};

/// alarm_rules table row: name, trigger, params (JSON text).
Row rule_to_row(const AlarmRule& rule);
AlarmRule rule_from_row(const Row& row);
/// Throws BadRule.
AlarmRule rule_from_json(const nlohmann::json& j);
nlohmann::json rule_to_json(const AlarmRule& rule);

struct AlarmRaised {
  std::string rule;
  std::uint8_t station = 0;
  std::optional<rf::Uid> uid;
  std::string detail;
};

/// Evaluates rules against incoming events and the passage of time.
class AlarmEngine {
 public:
  void set_rules(std::vector<AlarmRule> rules);
  const std::vector<AlarmRule>& rules() const noexcept { return rules_; }

  /// ALARM events never trigger anything.
  std::vector<AlarmRaised> on_event(const net::EventRecord& event);

  /// Records a successful exchange with a station; re-arms its silence rules.
  void note_contact(std::uint8_t station, std::uint64_t now_us);
  /// Fires each armed silence rule whose station has been quiet for at least
  /// the rule's duration, once, until the next contact.
  std::vector<AlarmRaised> tick(std::uint64_t now_us);

  /// Stations known to the silence rules.
  void track(std::uint8_t station, std::uint64_t now_us);

  struct State {
    std::map<std::uint8_t, std::uint64_t> last_contact;
    std::set<std::pair<std::string, std::uint8_t>> fired;
  };
  State state() const { return {last_contact_, fired_}; }
  void restore(State s);

 private:
  bool watches(const AlarmRule& rule, std::uint8_t station) const;

  std::vector<AlarmRule> rules_;
  std::map<std::uint8_t, std::uint64_t> last_contact_;
  std::set<std::pair<std::string, std::uint8_t>> fired_;
};

}  // namespace rfidtrace::store
