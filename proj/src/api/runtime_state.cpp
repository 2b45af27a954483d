#include "rfidtrace/api/runtime_state.hpp"

#include <fstream>

#include "rfidtrace/common/hex.hpp"
#include "rfidtrace/store/persistence.hpp"

namespace rfidtrace::api {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json event_json(const net::EventRecord& e) {
  return {{"seq", e.seq},
          {"station", e.station},
          {"kind", static_cast<int>(e.kind)},
          {"uid", e.uid ? json(e.uid->hex()) : json(nullptr)},
          {"ts", e.sim_timestamp_us}};
}

net::EventRecord event_from(const json& j) {
  net::EventRecord e;
  e.seq = j.at("seq").get<std::uint32_t>();
  e.station = j.at("station").get<std::uint8_t>();
  e.kind = static_cast<net::EventKind>(j.at("kind").get<int>());
  if (!j.at("uid").is_null()) e.uid = rf::Uid::parse(j.at("uid").get<std::string>());
  e.sim_timestamp_us = j.at("ts").get<std::uint64_t>();
  return e;
}

const char* kPlainName = "runtime.json";
const char* kSealedName = "runtime.enc";

}  // namespace

json to_json(const RuntimeState& s) {
  json stations = json::array();
  for (const auto& [reader, st] : s.stations) {
    json events = json::array();
    for (const auto& e : st.events) events.push_back(event_json(e));
    stations.push_back({{"reader", reader},
                        {"addr", st.addr},
                        {"password", to_hex(ByteView(st.password.data(), st.password.size()))},
                        {"baud", static_cast<int>(st.baud)},
                        {"last_seq", st.last_seq},
                        {"warning_armed", st.warning_armed},
                        {"events", std::move(events)}});
  }
  json acked = json::array();
  for (const auto& [addr, seq] : s.acked) acked.push_back({addr, seq});
  json contact = json::array();
  for (const auto& [addr, t] : s.alarms.last_contact) contact.push_back({addr, t});
  json fired = json::array();
  for (const auto& [rule, addr] : s.alarms.fired) fired.push_back({rule, addr});
  return {{"version", 1},
          {"world", s.world},
          {"stations", std::move(stations)},
          {"acked", std::move(acked)},
          {"alarms", {{"last_contact", std::move(contact)}, {"fired", std::move(fired)}}}};
}

RuntimeState runtime_from_json(const json& j) {
  if (j.at("version").get<int>() != 1) throw std::runtime_error("unsupported runtime state version");
  RuntimeState s;
  s.world = j.at("world");
  for (const auto& st : j.at("stations")) {
    net::Station::State state;
    state.addr = st.at("addr").get<std::uint8_t>();
    const auto pw = from_hex(st.at("password").get<std::string>());
    if (pw.size() != state.password.size()) throw std::runtime_error("bad station password in runtime state");
    std::copy(pw.begin(), pw.end(), state.password.begin());
    state.baud = static_cast<net::BaudClass>(st.at("baud").get<int>());
    state.last_seq = st.at("last_seq").get<std::uint32_t>();
    state.warning_armed = st.at("warning_armed").get<bool>();
    for (const auto& e : st.at("events")) state.events.push_back(event_from(e));
    s.stations[st.at("reader").get<rf::ReaderId>()] = std::move(state);
  }
  for (const auto& a : j.at("acked")) s.acked[a.at(0).get<std::uint8_t>()] = a.at(1).get<std::uint32_t>();
  const auto& alarms = j.at("alarms");
  for (const auto& c : alarms.at("last_contact")) {
    s.alarms.last_contact[c.at(0).get<std::uint8_t>()] = c.at(1).get<std::uint64_t>();
  }
  for (const auto& f : alarms.at("fired")) s.alarms.fired.emplace(f.at(0).get<std::string>(), f.at(1).get<std::uint8_t>());
  return s;
}

void save_runtime(const fs::path& dir, const RuntimeState& s, store::SealingKey* key, bool durable) {
  const auto text = to_json(s).dump();
  const ByteView plain(reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
  if (key) {
    store::replace_file(dir / kSealedName, key->seal(plain), durable);
  } else {
    store::replace_file(dir / kPlainName, plain, durable);
  }
}

std::optional<RuntimeState> load_runtime(const fs::path& dir, store::SealingKey* key) {
  const auto path = dir / (key ? kSealedName : kPlainName);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  const std::string raw((std::istreambuf_iterator<char>(in)), {});
  std::string text = raw;
  if (key) {
    const auto plain = key->open(ByteView(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
    text.assign(plain.begin(), plain.end());
  }
  return runtime_from_json(json::parse(text));
}

}  // namespace rfidtrace::api
