#include "rfidtrace/api/service.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>

#include "rfidtrace/api/error.hpp"
#include "rfidtrace/api/journal.hpp"
#include "rfidtrace/api/runtime_state.hpp"
#include "rfidtrace/codec/codec.hpp"
#include "rfidtrace/codec/registry.hpp"
#include "rfidtrace/codec/template_document.hpp"
#include "rfidtrace/common/hex.hpp"
#include "rfidtrace/rf/world_document.hpp"
#include "rfidtrace/store/credentials.hpp"
#include "rfidtrace/store/records.hpp"
#include "rfidtrace/store/report.hpp"
#include "rfidtrace/sync/error.hpp"
#include "rfidtrace/sync/session.hpp"

namespace rfidtrace::api {

using nlohmann::json;
namespace tables = store::tables;
using store::Access;

namespace {

[[noreturn]] void bad_request(const std::string& what) { throw Error(Errc::BadRequest, what); }

const json& need(const json& b, const char* key) {
  if (!b.contains(key) || b.at(key).is_null()) bad_request(std::string("missing '") + key + "'");
  return b.at(key);
}

std::string str_arg(const json& b, const char* key) {
  const auto& v = need(b, key);
  if (!v.is_string()) bad_request(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::optional<std::string> opt_str(const json& b, const char* key) {
  if (!b.contains(key) || b.at(key).is_null()) return std::nullopt;
  return str_arg(b, key);
}

std::uint64_t uint_arg(const json& b, const char* key, std::uint64_t max = UINT64_MAX) {
  const auto& v = need(b, key);
  const bool ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  if (!ok || v.get<std::uint64_t>() > max) {
    bad_request(std::string("'") + key + "' must be an integer in 0.." + std::to_string(max));
  }
  return v.get<std::uint64_t>();
}

std::optional<std::uint64_t> opt_uint(const json& b, const char* key, std::uint64_t max = UINT64_MAX) {
  if (!b.contains(key) || b.at(key).is_null()) return std::nullopt;
  return uint_arg(b, key, max);
}

double num_arg(const json& b, const char* key, double fallback) {
  if (!b.contains(key) || b.at(key).is_null()) return fallback;
  const auto& v = b.at(key);
  if (!v.is_number()) bad_request(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

bool bool_arg(const json& b, const char* key, bool fallback) {
  if (!b.contains(key) || b.at(key).is_null()) return fallback;
  if (!b.at(key).is_boolean()) bad_request(std::string("'") + key + "' must be true or false");
  return b.at(key).get<bool>();
}

rf::Uid uid_arg(const json& b, const char* key = "uid") {
  const auto text = str_arg(b, key);
  try {
    return rf::Uid::parse(text);
  } catch (const std::exception&) {
    bad_request("'" + text + "' is not a 16 hex digit uid");
  }
}

std::uint8_t station_arg(const json& b, const char* key = "station") {
  return static_cast<std::uint8_t>(uint_arg(b, key, net::kMaxStationAddress));
}

store::Role role_arg(const std::string& text) {
  std::string upper = text;
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  const auto role = store::parse_role(upper);
  if (!role) bad_request("unknown role '" + text + "' (VIEWER, OPERATOR or ADMIN)");
  return *role;
}

std::string text_of(const store::Value& v) {
  const auto* s = std::get_if<std::string>(&v);
  return s ? *s : std::string();
}

std::int64_t int_of(const store::Value& v) {
  const auto* i = std::get_if<std::int64_t>(&v);
  return i ? *i : 0;
}

codec::TemplateRegistry registry_of(const std::vector<store::Row>& rows) {
  codec::TemplateRegistry reg;
  for (const auto& row : rows) reg.add(codec::template_from_json(json::parse(text_of(row.at(3)))));
  return reg;
}

codec::TagPayload payload_from_json(const codec::Template& t, const json& values) {
  codec::TagPayload p{t.template_id, t.version, {}};
  if (values.is_array()) {
    if (values.size() != t.fields.size()) {
      bad_request("template " + t.name + " has " + std::to_string(t.fields.size()) + " fields");
    }
    for (std::size_t i = 0; i < values.size(); ++i) p.values.push_back(codec::value_from_json(t.fields[i], values[i]));
    return p;
  }
  if (!values.is_object()) bad_request("'values' must be an object keyed by field name");
  for (const auto& [k, _] : values.items()) {
    const bool known = std::any_of(t.fields.begin(), t.fields.end(), [&](const auto& f) { return f.name == k; });
    if (!known) bad_request("template " + t.name + " has no field '" + k + "'");
  }
  for (const auto& f : t.fields) {
    if (!values.contains(f.name)) bad_request("missing value for field '" + f.name + "'");
    p.values.push_back(codec::value_from_json(f, values.at(f.name)));
  }
  return p;
}

json payload_to_json(const codec::Template& t, const codec::TagPayload& p) {
  json values = json::object();
  for (std::size_t i = 0; i < t.fields.size() && i < p.values.size(); ++i) {
    values[t.fields[i].name] = codec::value_to_json(p.values[i]);
  }
  return values;
}

json field_event_json(const rf::FieldEvent& e) {
  return {{"kind", e.kind == rf::FieldEvent::Kind::Enter ? "ENTER" : "LEAVE"},
          {"uid", e.uid.hex()},
          {"reader", e.reader}};
}

/// Declares the configured station readers a world document leaves out.
json with_readers(json doc, const std::vector<StationConfig>& stations) {
  if (!doc.is_object()) return doc;
  if (!doc.contains("readers")) doc["readers"] = json::array();
  auto& readers = doc["readers"];
  if (!readers.is_array()) return doc;
  for (const auto& sc : stations) {
    const bool declared = std::any_of(readers.begin(), readers.end(), [&](const json& r) {
      return r.is_object() && r.contains("id") && r.at("id") == sc.reader;
    });
    if (!declared) readers.push_back({{"id", sc.reader}, {"profile", sc.profile}});
  }
  return doc;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::BadConfig, "cannot read " + p.string());
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

}  // namespace

// ---------------------------------------------------------------------------
// Routing

const std::map<std::string, std::pair<Service::Handler, std::optional<Requirement>>, std::less<>>& Service::routes() {
  using R = Requirement;
  static const std::map<std::string, std::pair<Handler, std::optional<Requirement>>, std::less<>> r{
      {"health", {&Service::health, std::nullopt}},
      {"login", {&Service::login, std::nullopt}},
      {"logout", {&Service::logout, R{}}},
      {"whoami", {&Service::whoami, R{}}},
      {"template.define", {&Service::template_define, R{tables::kTemplates, Access::Upsert}}},
      {"template.list", {&Service::template_list, R{tables::kTemplates, Access::Read}}},
      {"template.get", {&Service::template_get, R{tables::kTemplates, Access::Read}}},
      {"template.delete", {&Service::template_delete, R{tables::kTemplates, Access::Delete}}},
      {"tag.write", {&Service::tag_write, R{tables::kTransponders, Access::Upsert}}},
      {"tag.read", {&Service::tag_read, R{tables::kTransponders, Access::Read}}},
      {"station.list", {&Service::station_list, R{tables::kStations, Access::Read}}},
      {"station.set", {&Service::station_set, R{tables::kStations, Access::Upsert}}},
      {"inventory", {&Service::inventory, R{tables::kTransponders, Access::Upsert}}},
      {"poll", {&Service::poll, R{tables::kEvents, Access::Upsert}}},
      {"events.query", {&Service::events_query, R{tables::kEvents, Access::Read}}},
      {"alarm.define", {&Service::alarm_define, R{tables::kAlarmRules, Access::Upsert}}},
      {"alarm.list", {&Service::alarm_list, R{tables::kAlarmRules, Access::Read}}},
      {"alarm.delete", {&Service::alarm_delete, R{tables::kAlarmRules, Access::Delete}}},
      {"report.define", {&Service::report_define, R{tables::kReportPatterns, Access::Upsert}}},
      {"report.list", {&Service::report_list, R{tables::kReportPatterns, Access::Read}}},
      {"report.delete", {&Service::report_delete, R{tables::kReportPatterns, Access::Delete}}},
      {"report.render", {&Service::report_render, R{tables::kReportPatterns, Access::Read}}},
      {"sim.load", {&Service::sim_load, R{"simulation", Access::Upsert}}},
      {"sim.add_tag", {&Service::sim_add_tag, R{"simulation", Access::Upsert}}},
      {"sim.move", {&Service::sim_move, R{"simulation", Access::Upsert}}},
      {"sim.advance", {&Service::sim_advance, R{"simulation", Access::Upsert}}},
      {"sim.state", {&Service::sim_state, R{"simulation", Access::Read}}},
      {"sync.run", {&Service::sync_run, R{"sync", Access::Upsert}}},
      {"sync.manifest", {&Service::sync_manifest, R{"sync", Access::Read}}},
      {"sync.state", {&Service::sync_state, R{"sync", Access::Read}}},
      {"sync.connect", {&Service::sync_connect, R{"sync", Access::Upsert}}},
      {"sync.disconnect", {&Service::sync_disconnect, R{"sync", Access::Upsert}}},
      {"device.put", {&Service::device_put, R{"device_files", Access::Upsert}}},
      {"device.get", {&Service::device_get, R{"device_files", Access::Read}}},
      {"device.delete", {&Service::device_delete, R{"device_files", Access::Delete}}},
      {"device.mkdir", {&Service::device_mkdir, R{"device_files", Access::Upsert}}},
      {"device.rmdir", {&Service::device_rmdir, R{"device_files", Access::Delete}}},
      {"device.stat", {&Service::device_stat, R{"device_files", Access::Read}}},
      {"user.create", {&Service::user_create, R{tables::kUsers, Access::Upsert}}},
      {"user.list", {&Service::user_list, R{tables::kUsers, Access::Read}}},
      {"user.set", {&Service::user_set, R{tables::kUsers, Access::Upsert}}},
      {"user.delete", {&Service::user_delete, R{tables::kUsers, Access::Delete}}},
  };
  return r;
}

const std::vector<std::string>& Service::endpoints() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : routes()) out.push_back(name);
    return out;
  }();
  return names;
}

std::optional<Requirement> Service::requirement(std::string_view endpoint) {
  const auto it = routes().find(endpoint);
  if (it == routes().end()) throw Error(Errc::NotFound, "unknown endpoint '" + std::string(endpoint) + "'");
  return it->second.second;
}

Service::Caller Service::authenticate(const std::optional<std::string>& token) {
  if (!token) return Caller{"local", store::Role::Admin, std::nullopt};
  const auto s = sessions_.find(*token);
  if (!s) throw Error(Errc::Unauthenticated, "missing, unknown or expired session");
  return Caller{s->username, s->role, s->token};
}

json Service::handle(std::string_view endpoint, const json& body, const std::optional<std::string>& token) {
  const auto it = routes().find(endpoint);
  if (it == routes().end()) throw Error(Errc::NotFound, "unknown endpoint '" + std::string(endpoint) + "'");
  const auto& [fn, req] = it->second;
  Caller caller{"", store::Role::Viewer, std::nullopt};
  if (req) {
    caller = authenticate(token);
    if (!req->table.empty() && !store::allowed(caller.role, req->table, req->access)) {
      throw Error(Errc::Forbidden, std::string(store::to_string(caller.role)) + " may not call " +
                                       std::string(endpoint));
    }
  }
  if (!body.is_null() && !body.is_object()) bad_request("request body must be a JSON object");
  static const json empty = json::object();
  return (this->*fn)(caller, body.is_null() ? empty : body);
}

Reply Service::call(std::string_view endpoint, const json& body, const std::optional<std::string>& token) {
  try {
    return Reply{200, {{"ok", true}, {"result", handle(endpoint, body, token)}}};
  } catch (const std::exception& e) {
    const auto f = describe_failure(e);
    return Reply{f.http_status, {{"ok", false}, {"error", {{"code", f.code}, {"message", f.message}}}}};
  }
}

// ---------------------------------------------------------------------------
// Startup

Service::Service(ServiceConfig config, Options options)
    : config_(std::move(config)),
      sessions_(std::chrono::seconds(std::llround(config_.session_hours * 3600)), options.session_clock) {
  store_dir_ = std::make_unique<store::StoreDirectory>(
      config_.store_dir, store::StoreOptions{config_.passphrase, config_.kdf, config_.durable}, options.store_clock);
  if (config_.passphrase) runtime_key_ = std::make_unique<store::SealingKey>(*config_.passphrase, config_.kdf);

  const auto encoder = [this](const json& payload) {
    const auto reg = registry_of(store().rows(store::Actor::internal(), tables::kTemplates));
    const auto id = uint_arg(payload, "template_id", 0xFFFF);
    const auto version = uint_arg(payload, "version", 0xFF);
    const auto* t = reg.find(static_cast<std::uint16_t>(id), static_cast<std::uint8_t>(version));
    if (!t) throw codec::Error(codec::Errc::UnknownTemplate, std::to_string(id) + "/" + std::to_string(version));
    return codec::encode(*t, payload_from_json(*t, need(payload, "values")));
  };

  std::optional<RuntimeState> runtime;
  try {
    runtime = load_runtime(config_.store_dir, runtime_key_.get());
  } catch (const store::Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::BadConfig, "runtime state in " + config_.store_dir.string() + ": " + e.what());
  }
  std::vector<rf::FieldEvent> initial;
  if (runtime) {
    world_ = rf::world_from_json(runtime->world).world;
  } else if (config_.world) {
    try {
      auto loaded = rf::world_from_json(with_readers(json::parse(read_file(*config_.world)), config_.stations), encoder);
      world_ = std::move(loaded.world);
      initial = std::move(loaded.events);
    } catch (const std::exception& e) {
      throw Error(Errc::BadConfig, "world file " + config_.world->string() + ": " + e.what());
    }
  }
  ensure_readers();

  bus_ = std::make_unique<net::InProcessBus>([this] { return world_.now_us(); });
  master_ = std::make_unique<net::Master>(*bus_);
  for (const auto& sc : config_.stations) {
    StationSlot slot{sc, std::make_unique<net::Station>(sc.addr, net::password_from_string(sc.password), world_,
                                                        sc.reader)};
    if (runtime && runtime->stations.contains(sc.reader)) slot.station->restore(runtime->stations.at(sc.reader));
    const auto state = slot.station->state();
    std::uint32_t acked = 0;
    if (runtime && runtime->acked.contains(state.addr)) acked = runtime->acked.at(state.addr);
    bus_->attach(*slot.station);
    master_->register_station(state.addr, state.password, acked);
    stations_.push_back(std::move(slot));
  }
  deliver(initial);
  if (runtime) alarms_.restore(runtime->alarms);
  for (const auto& slot : stations_) alarms_.track(slot.station->addr(), world_.now_us());
  sync_station_rows();

  for (const auto& dc : config_.devices) {
    Device d;
    d.config = dc;
    if (dc.dir) {
      d.local = std::make_unique<sync::CompactStore>(*dc.dir,
                                                     sync::CompactStore::Options{dc.id, dc.capacity_bytes, config_.durable, {}});
      d.agent = std::make_unique<sync::InProcessDevice>(*d.local);
      d.link = std::make_unique<sync::DeviceLink>(dc.id, d.agent->connector());
    } else {
      const auto endpoint = *dc.endpoint;
      d.link = std::make_unique<sync::DeviceLink>(
          dc.id, [endpoint] { return sync::connect_tcp(endpoint, std::chrono::seconds(5)); });
    }
    devices_.emplace(dc.id, std::move(d));
  }

  std::lock_guard lock(sim_mutex_);
  save_runtime_locked();
}

Service::~Service() {
  stop_polling();
  for (auto& [_, d] : devices_) {
    d.link->disconnect();
    if (d.agent) d.agent->join();
  }
}

void Service::start_polling() {
  if (config_.poll_interval_ms == 0 || poll_thread_.joinable()) return;
  poll_stop_ = false;
  poll_thread_ = std::thread([this] {
    std::unique_lock lock(poll_mutex_);
    while (!poll_cv_.wait_for(lock, std::chrono::milliseconds(config_.poll_interval_ms), [this] { return poll_stop_; })) {
      lock.unlock();
      try {
        std::lock_guard sim(sim_mutex_);
        poll_locked();
      } catch (const std::exception& e) {
        std::cerr << "background poll: " << e.what() << "\n";
      }
      lock.lock();
    }
  });
}

void Service::stop_polling() {
  {
    std::lock_guard lock(poll_mutex_);
    poll_stop_ = true;
  }
  poll_cv_.notify_all();
  if (poll_thread_.joinable()) poll_thread_.join();
}

// ---------------------------------------------------------------------------
// Simulation plumbing

void Service::ensure_readers() {
  for (const auto& sc : config_.stations) {
    if (!world_.has_reader(sc.reader)) world_.add_reader(sc.reader, rf::default_profile(sc.profile));
  }
}

void Service::deliver(const std::vector<rf::FieldEvent>& events) {
  for (const auto& e : events) {
    for (auto& slot : stations_) {
      if (slot.station->reader() == e.reader) slot.station->on_field_event(e);
    }
  }
}

Service::StationSlot& Service::slot_at(std::uint8_t addr) {
  for (auto& slot : stations_) {
    if (slot.station->addr() == addr) return slot;
  }
  throw Error(Errc::NotFound, "no station at address " + std::to_string(addr));
}

void Service::save_runtime_locked() {
  RuntimeState s;
  s.world = rf::world_to_json(world_);
  for (const auto& slot : stations_) {
    s.stations[slot.station->reader()] = slot.station->state();
    if (master_->registered(slot.station->addr())) {
      s.acked[slot.station->addr()] = master_->acked_seq(slot.station->addr());
    }
  }
  s.alarms = alarms_.state();
  save_runtime(config_.store_dir, s, runtime_key_.get(), config_.durable);
}

std::uint32_t Service::next_central_seq() const {
  std::uint32_t top = 0;
  for (const auto& row : store_dir_->store().rows(store::Actor::internal(), tables::kEvents)) {
    if (int_of(row.at(0)) == store::kCentralStation) top = std::max(top, static_cast<std::uint32_t>(int_of(row.at(1))));
  }
  return top + 1;
}

void Service::note_sighting(const rf::Uid& uid, std::uint8_t station, std::uint64_t at_us) {
  auto& st = store();
  const auto existing = st.get(store::Actor::internal(), tables::kTransponders, {uid.hex()});
  store::Row row = existing ? *existing : store::transponder_row(uid, std::nullopt, std::nullopt, std::nullopt,
                                                                  std::nullopt, std::nullopt);
  row.at(4) = std::int64_t{station};
  row.at(5) = static_cast<std::int64_t>(at_us);
  if (!existing || !store::same(row, *existing)) st.upsert(store::Actor::internal(), tables::kTransponders, row);
}

void Service::sync_station_rows(const std::vector<std::uint8_t>& timeouts) {
  auto& st = store();
  const auto actor = store::Actor::internal();
  std::set<std::int64_t> live;
  for (const auto& slot : stations_) {
    const auto addr = slot.station->addr();
    live.insert(addr);
    const auto existing = st.get(actor, tables::kStations, {std::int64_t{addr}});
    const auto name = existing ? text_of(existing->at(1)) : slot.config.name;
    const bool silent = std::find(timeouts.begin(), timeouts.end(), addr) != timeouts.end();
    const auto row = store::station_row(addr, name, static_cast<std::uint8_t>(slot.station->baud()),
                                        silent ? "timeout" : "online");
    if (!existing || !store::same(row, *existing)) st.upsert(actor, tables::kStations, row);
  }
  for (const auto& row : st.rows(actor, tables::kStations)) {
    if (!live.contains(int_of(row.at(0)))) st.remove(actor, tables::kStations, {row.at(0)});
  }
}

void Service::raise_alarms(const std::vector<store::AlarmRaised>& raised, std::uint64_t now_us) {
  auto seq = next_central_seq();
  const auto ingest = store().now();
  for (const auto& a : raised) {
    net::EventRecord e{seq++, store::kCentralStation, net::EventKind::Alarm, a.uid, now_us};
    store().upsert(store::Actor::internal(), tables::kEvents, store::event_row(e, ingest, a.rule + ": " + a.detail));
  }
}

json Service::poll_locked() {
  std::vector<store::AlarmRule> rules;
  for (const auto& row : store().rows(store::Actor::internal(), tables::kAlarmRules)) {
    rules.push_back(store::rule_from_row(row));
  }
  alarms_.set_rules(std::move(rules));

  const auto result = master_->poll_cycle();
  const auto now = world_.now_us();
  const auto ingest = store().now();
  std::vector<store::AlarmRaised> raised;
  std::size_t count = 0;
  for (const auto& batch : result.batches) {
    for (const auto& e : batch.events) {
      store().upsert(store::Actor::internal(), tables::kEvents, store::event_row(e, ingest));
      ++count;
      if (e.kind == net::EventKind::TagEnter && e.uid) note_sighting(*e.uid, e.station, e.sim_timestamp_us);
      auto r = alarms_.on_event(e);
      raised.insert(raised.end(), r.begin(), r.end());
    }
  }
  for (const auto addr : result.responsive) alarms_.note_contact(addr, now);
  auto ticked = alarms_.tick(now);
  raised.insert(raised.end(), ticked.begin(), ticked.end());
  raise_alarms(raised, now);
  sync_station_rows(result.timeouts);
  save_runtime_locked();

  json gaps = json::array();
  for (const auto& g : result.gaps) gaps.push_back({{"station", g.addr}, {"expected", g.expected}, {"received", g.received}});
  json alarms = json::array();
  for (const auto& a : raised) alarms.push_back({{"rule", a.rule}, {"station", a.station}, {"detail", a.detail}});
  return {{"events", count}, {"alarms", std::move(alarms)}, {"timeouts", result.timeouts}, {"gaps", std::move(gaps)},
          {"sim_time_us", now}};
}

// ---------------------------------------------------------------------------
// Session endpoints

json Service::health(const Caller&, const json&) {
  json revisions = json::object();
  for (const auto& s : store::builtin_schemas()) revisions[s.name] = store().revision(s.name);
  std::lock_guard lock(sim_mutex_);
  return {{"status", "OK"},
          {"stations", stations_.size()},
          {"devices", devices_.size()},
          {"encrypted", store_dir_->encrypted()},
          {"sim_time_us", world_.now_us()},
          {"store", std::move(revisions)}};
}

json Service::login(const Caller&, const json& b) {
  const auto id = store::authenticate(store(), str_arg(b, "username"), str_arg(b, "password"));
  const auto s = sessions_.open(id.username, id.role);
  return {{"token", s.token},
          {"username", s.username},
          {"role", std::string(store::to_string(s.role))},
          {"expires_in_s", std::llround(config_.session_hours * 3600)}};
}

json Service::logout(const Caller& c, const json&) {
  if (c.token) sessions_.close(*c.token);
  return json::object();
}

json Service::whoami(const Caller& c, const json&) {
  return {{"username", c.username}, {"role", std::string(store::to_string(c.role))}};
}

// ---------------------------------------------------------------------------
// Templates

json Service::template_define(const Caller& c, const json& b) {
  const auto t = codec::template_from_json(b);
  codec::validate(t);
  store().insert(c.actor(), tables::kTemplates,
                 {std::int64_t{t.template_id}, std::int64_t{t.version}, t.name, codec::template_to_json(t).dump()});
  return {{"template_id", t.template_id},
          {"version", t.version},
          {"encoded_size", codec::encoded_size(t)}};
}

json Service::template_list(const Caller& c, const json&) {
  json out = json::array();
  for (const auto& row : store().rows(c.actor(), tables::kTemplates)) {
    auto doc = json::parse(text_of(row.at(3)));
    doc["encoded_size"] = codec::encoded_size(codec::template_from_json(json::parse(text_of(row.at(3)))));
    out.push_back(std::move(doc));
  }
  return out;
}

json Service::template_get(const Caller& c, const json& b) {
  const auto id = static_cast<std::int64_t>(uint_arg(b, "template_id", 0xFFFF));
  const auto version = static_cast<std::int64_t>(uint_arg(b, "version", 0xFF));
  const auto row = store().get(c.actor(), tables::kTemplates, {id, version});
  if (!row) throw Error(Errc::NotFound, "no template " + std::to_string(id) + "/" + std::to_string(version));
  return json::parse(text_of(row->at(3)));
}

json Service::template_delete(const Caller& c, const json& b) {
  const auto id = static_cast<std::int64_t>(uint_arg(b, "template_id", 0xFFFF));
  const auto version = static_cast<std::int64_t>(uint_arg(b, "version", 0xFF));
  store().remove(c.actor(), tables::kTemplates, {id, version});
  return json::object();
}

// ---------------------------------------------------------------------------
// Tags and stations

json Service::tag_write(const Caller& c, const json& b) {
  const auto addr = station_arg(b);
  const auto uid = uid_arg(b);
  const auto id = static_cast<std::uint16_t>(uint_arg(b, "template_id", 0xFFFF));
  const auto version = static_cast<std::uint8_t>(uint_arg(b, "version", 0xFF));
  const auto reg = registry_of(store().rows(c.actor(), tables::kTemplates));
  const auto* t = reg.find(id, version);
  if (!t) throw codec::Error(codec::Errc::UnknownTemplate, std::to_string(id) + "/" + std::to_string(version));
  const auto payload = payload_from_json(*t, need(b, "values"));
  const auto bytes = codec::encode(*t, payload);

  std::lock_guard lock(sim_mutex_);
  slot_at(addr);
  const auto probe = master_->read_tag(addr, uid, 0, 1);
  Bytes data;
  std::size_t blocks = 0;
  for (const auto& block : codec::blocks_for(bytes, probe.block_size, 256)) {
    data.insert(data.end(), block.begin(), block.end());
    ++blocks;
  }
  master_->write_tag(addr, uid, 0, data, probe.block_size);
  const auto now = world_.now_us();
  save_runtime_locked();
  store().upsert(store::Actor::internal(), tables::kTransponders,
                 store::transponder_row(uid, id, version, bytes, addr, now));
  return {{"uid", uid.hex()},
          {"station", addr},
          {"bytes", bytes.size()},
          {"blocks", blocks},
          {"block_size", probe.block_size}};
}

json Service::tag_read(const Caller& c, const json& b) {
  const auto addr = station_arg(b);
  const auto uid = uid_arg(b);
  Bytes raw;
  {
    std::lock_guard lock(sim_mutex_);
    slot_at(addr);
    auto first = master_->read_tag(addr, uid, 0, 1);
    const auto bs = first.block_size;
    raw = std::move(first.data);
    const std::size_t header_blocks = (6 + bs - 1) / bs;
    if (header_blocks > 1) {
      const auto more = master_->read_tag(addr, uid, 1, header_blocks - 1);
      raw.insert(raw.end(), more.data.begin(), more.data.end());
    }
    const auto total = codec::announced_length(raw);
    const std::size_t total_blocks = (total + bs - 1) / bs;
    const std::size_t have = raw.size() / bs;
    if (total_blocks > have) {
      const auto rest = master_->read_tag(addr, uid, have, total_blocks - have);
      raw.insert(raw.end(), rest.data.begin(), rest.data.end());
    }
    raw.resize(total);
    save_runtime_locked();
  }
  const auto reg = registry_of(store().rows(c.actor(), tables::kTemplates));
  const auto payload = codec::decode(raw, reg);
  const auto* t = reg.find(payload.template_id, payload.version);
  return {{"uid", uid.hex()},
          {"station", addr},
          {"template_id", payload.template_id},
          {"version", payload.version},
          {"values", payload_to_json(*t, payload)},
          {"raw", to_hex(raw)}};
}

json Service::station_list(const Caller& c, const json&) {
  std::map<std::int64_t, store::Row> rows;
  for (auto& row : store().rows(c.actor(), tables::kStations)) rows.emplace(int_of(row.at(0)), row);
  std::lock_guard lock(sim_mutex_);
  json out = json::array();
  for (const auto& slot : stations_) {
    const auto addr = slot.station->addr();
    const auto it = rows.find(addr);
    out.push_back({{"addr", addr},
                   {"reader", slot.station->reader()},
                   {"name", it != rows.end() ? text_of(it->second.at(1)) : slot.config.name},
                   {"baud_class", static_cast<int>(slot.station->baud())},
                   {"status", it != rows.end() ? text_of(it->second.at(3)) : "unknown"},
                   {"buffered_events", slot.station->ring().size()},
                   {"last_seq", slot.station->last_seq()},
                   {"acked_seq", master_->acked_seq(addr)}});
  }
  return out;
}

json Service::station_set(const Caller& c, const json& b) {
  auto addr = station_arg(b, "addr");
  std::lock_guard lock(sim_mutex_);
  slot_at(addr);
  if (const auto baud = opt_uint(b, "baud_class", net::kMaxBaudClass)) {
    master_->set_baud(addr, static_cast<net::BaudClass>(*baud));
  }
  if (const auto pw = opt_str(b, "password")) {
    if (pw->size() != 4) bad_request("station password must be exactly 4 characters");
    master_->set_password(addr, net::password_from_string(*pw));
  }
  if (const auto next = opt_uint(b, "new_addr", net::kMaxStationAddress)) {
    if (*next != addr) {
      master_->set_address(addr, static_cast<std::uint8_t>(*next));
      const auto old = store().get(store::Actor::internal(), tables::kStations, {std::int64_t{addr}});
      if (old) {
        auto row = *old;
        row.at(0) = static_cast<std::int64_t>(*next);
        store().remove(c.actor(), tables::kStations, {std::int64_t{addr}});
        store().upsert(c.actor(), tables::kStations, row);
      }
      addr = static_cast<std::uint8_t>(*next);
    }
  }
  if (const auto name = opt_str(b, "name")) {
    auto row = store().get(c.actor(), tables::kStations, {std::int64_t{addr}});
    if (row && text_of(row->at(1)) != *name) {
      row->at(1) = *name;
      store().upsert(c.actor(), tables::kStations, *row);
    }
  }
  sync_station_rows();
  save_runtime_locked();
  auto& slot = slot_at(addr);
  return {{"addr", addr}, {"baud_class", static_cast<int>(slot.station->baud())}};
}

json Service::inventory(const Caller&, const json& b) {
  const auto addr = station_arg(b);
  std::lock_guard lock(sim_mutex_);
  slot_at(addr);
  const auto reply = master_->inventory(addr);
  const auto now = world_.now_us();
  json uids = json::array();
  for (const auto& uid : reply.uids) {
    note_sighting(uid, addr, now);
    uids.push_back(uid.hex());
  }
  save_runtime_locked();
  return {{"station", addr}, {"uids", std::move(uids)}, {"truncated", reply.truncated}, {"sim_time_us", now}};
}

json Service::poll(const Caller&, const json&) {
  std::lock_guard lock(sim_mutex_);
  return poll_locked();
}

json Service::events_query(const Caller& c, const json& b) {
  const auto q = journal_query_from_json(b);
  return to_json(run_journal_query(q, store().table_copy(c.actor(), tables::kEvents)));
}

// ---------------------------------------------------------------------------
// Alarm rules and reports

json Service::alarm_define(const Caller& c, const json& b) {
  const auto rule = store::rule_from_json(b);
  store().upsert(c.actor(), tables::kAlarmRules, store::rule_to_row(rule));
  return store::rule_to_json(rule);
}

json Service::alarm_list(const Caller& c, const json&) {
  json out = json::array();
  for (const auto& row : store().rows(c.actor(), tables::kAlarmRules)) out.push_back(store::rule_to_json(store::rule_from_row(row)));
  return out;
}

json Service::alarm_delete(const Caller& c, const json& b) {
  store().remove(c.actor(), tables::kAlarmRules, {str_arg(b, "name")});
  return json::object();
}

namespace {

json pattern_json(const store::ReportPattern& p) {
  return {{"name", p.name},         {"source", p.source}, {"filter", p.filter},
          {"columns", p.columns},   {"sort", p.sort},     {"format", std::string(store::to_string(p.format))}};
}

}  // namespace

json Service::report_define(const Caller& c, const json& b) {
  store::ReportPattern p;
  p.name = str_arg(b, "name");
  p.source = str_arg(b, "source");
  p.filter = opt_str(b, "filter").value_or("");
  if (b.contains("columns") && !b.at("columns").is_null()) {
    const auto& cols = b.at("columns");
    if (cols.is_string()) {
      std::string item;
      for (const char ch : cols.get<std::string>() + ",") {
        if (ch == ',') {
          if (!item.empty()) p.columns.push_back(item);
          item.clear();
        } else if (ch != ' ') {
          item += ch;
        }
      }
    } else if (cols.is_array()) {
      for (const auto& col : cols) {
        if (!col.is_string()) bad_request("'columns' must hold column names");
        p.columns.push_back(col.get<std::string>());
      }
    } else {
      bad_request("'columns' must be a list or a comma-separated string");
    }
  }
  p.sort = opt_str(b, "sort").value_or("");
  p.format = store::parse_report_format(opt_str(b, "format").value_or("CSV"));
  store::validate(p, store().snapshot());
  store().upsert(c.actor(), tables::kReportPatterns, store::pattern_to_row(p));
  return pattern_json(p);
}

json Service::report_list(const Caller& c, const json&) {
  json out = json::array();
  for (const auto& row : store().rows(c.actor(), tables::kReportPatterns)) out.push_back(pattern_json(store::pattern_from_row(row)));
  return out;
}

json Service::report_delete(const Caller& c, const json& b) {
  store().remove(c.actor(), tables::kReportPatterns, {str_arg(b, "name")});
  return json::object();
}

json Service::report_render(const Caller& c, const json& b) {
  const auto name = str_arg(b, "name");
  const auto row = store().get(c.actor(), tables::kReportPatterns, {name});
  if (!row) throw Error(Errc::NotFound, "no report pattern '" + name + "'");
  const auto p = store::pattern_from_row(*row);
  if (!store::allowed(c.role, p.source, Access::Read)) {
    throw Error(Errc::Forbidden, std::string(store::to_string(c.role)) + " may not read " + p.source);
  }
  return {{"name", p.name},
          {"format", std::string(store::to_string(p.format))},
          {"content", store::render_report(p, store().snapshot())}};
}

// ---------------------------------------------------------------------------
// Simulation

json Service::sim_load(const Caller&, const json& b) {
  const auto encoder = [this](const json& payload) {
    const auto reg = registry_of(store().rows(store::Actor::internal(), tables::kTemplates));
    const auto id = uint_arg(payload, "template_id", 0xFFFF);
    const auto version = uint_arg(payload, "version", 0xFF);
    const auto* t = reg.find(static_cast<std::uint16_t>(id), static_cast<std::uint8_t>(version));
    if (!t) throw codec::Error(codec::Errc::UnknownTemplate, std::to_string(id) + "/" + std::to_string(version));
    return codec::encode(*t, payload_from_json(*t, need(payload, "values")));
  };
  rf::LoadedWorld loaded;
  const auto doc = b.contains("world") ? b.at("world") : json::parse(read_file(str_arg(b, "path")));
  loaded = rf::world_from_json(with_readers(doc, config_.stations), encoder);
  std::lock_guard lock(sim_mutex_);
  // The simulated clock never runs backwards; stations stamp events with it.
  const auto now = world_.now_us();
  world_ = std::move(loaded.world);
  if (world_.now_us() < now) world_.set_clock_us(now);
  ensure_readers();
  deliver(loaded.events);
  save_runtime_locked();
  json events = json::array();
  for (const auto& e : loaded.events) events.push_back(field_event_json(e));
  return {{"tags", world_.tag_count()}, {"readers", world_.readers().size()}, {"events", std::move(events)}};
}

json Service::sim_add_tag(const Caller&, const json& b) {
  const auto uid = uid_arg(b);
  const auto count = opt_uint(b, "block_count", 256).value_or(rf::kDefaultBlockCount);
  const auto size = opt_uint(b, "block_size", 255).value_or(rf::kDefaultBlockSize);
  rf::TagEmulation tag(uid, count, size, num_arg(b, "position_cm", 0.0));
  if (const auto memory = opt_str(b, "memory")) {
    tag.load_memory(from_hex(*memory));
  } else if (b.contains("payload") && !b.at("payload").is_null()) {
    const auto& payload = b.at("payload");
    const auto reg = registry_of(store().rows(store::Actor::internal(), tables::kTemplates));
    const auto* t = reg.find(static_cast<std::uint16_t>(uint_arg(payload, "template_id", 0xFFFF)),
                             static_cast<std::uint8_t>(uint_arg(payload, "version", 0xFF)));
    if (!t) throw codec::Error(codec::Errc::UnknownTemplate, payload.dump());
    tag.load_memory(codec::encode(*t, payload_from_json(*t, need(payload, "values")), tag.capacity()));
  }
  std::optional<rf::ReaderId> reader;
  if (const auto r = opt_uint(b, "reader", 0xFFFF)) reader = static_cast<rf::ReaderId>(*r);
  std::lock_guard lock(sim_mutex_);
  const auto events = world_.add_tag(std::move(tag), reader);
  deliver(events);
  save_runtime_locked();
  json out = json::array();
  for (const auto& e : events) out.push_back(field_event_json(e));
  return {{"uid", uid.hex()}, {"events", std::move(out)}};
}

json Service::sim_move(const Caller&, const json& b) {
  const auto uid = uid_arg(b);
  const auto position = num_arg(b, "position_cm", std::nan(""));
  if (std::isnan(position)) bad_request("missing 'position_cm'");
  std::lock_guard lock(sim_mutex_);
  std::vector<rf::FieldEvent> events;
  if (b.contains("reader")) {
    std::optional<rf::ReaderId> reader;
    if (const auto r = opt_uint(b, "reader", 0xFFFF)) reader = static_cast<rf::ReaderId>(*r);
    events = world_.move_tag(uid, reader, position);
  } else {
    events = world_.move_tag(uid, position);
  }
  deliver(events);
  save_runtime_locked();
  json out = json::array();
  for (const auto& e : events) out.push_back(field_event_json(e));
  return {{"uid", uid.hex()}, {"events", std::move(out)}, {"sim_time_us", world_.now_us()}};
}

json Service::sim_advance(const Caller&, const json& b) {
  const auto us = uint_arg(b, "us", 1ull << 50);
  std::lock_guard lock(sim_mutex_);
  world_.advance_us(us);
  save_runtime_locked();
  return {{"sim_time_us", world_.now_us()}};
}

json Service::sim_state(const Caller&, const json&) {
  std::lock_guard lock(sim_mutex_);
  json stations = json::array();
  for (const auto& slot : stations_) {
    json tags = json::array();
    for (const auto& t : world_.tags_at(slot.station->reader())) {
      tags.push_back({{"uid", t.uid().hex()}, {"position_cm", t.position_cm()}});
    }
    stations.push_back({{"addr", slot.station->addr()}, {"reader", slot.station->reader()}, {"tags", std::move(tags)}});
  }
  return {{"sim_time_us", world_.now_us()}, {"stations", std::move(stations)}, {"world", rf::world_to_json(world_)}};
}

// ---------------------------------------------------------------------------
// Sync and device files

Service::Device& Service::device(const json& b) {
  const auto id = str_arg(b, "device");
  const auto it = devices_.find(id);
  if (it == devices_.end()) throw Error(Errc::NotFound, "no device '" + id + "' in the configuration");
  return it->second;
}

namespace {

sync::DeviceLink& connected(sync::DeviceLink& link) {
  if (link.state() != sync::LinkState::Connected) link.connect();
  return link;
}

json status_json(sync::Status s) { return {{"status", std::string(sync::to_string(s))}}; }

}  // namespace

json Service::sync_run(const Caller& c, const json& b) {
  auto& d = device(b);
  sync::SyncOptions options;
  options.tables = config_.sync_tables;
  if (b.contains("tables") && !b.at("tables").is_null()) {
    if (!b.at("tables").is_array()) bad_request("'tables' must be a list of table names");
    options.tables = b.at("tables").get<std::vector<std::string>>();
  }
  for (const auto& t : options.tables) {
    if (!store::allowed(c.role, t, Access::Upsert)) {
      throw Error(Errc::Forbidden, std::string(store::to_string(c.role)) + " may not sync " + t);
    }
  }
  options.archive_dir = config_.store_dir / "conflicts";
  return sync::to_json(sync::sync_session(connected(*d.link), store(), options));
}

json Service::sync_manifest(const Caller&, const json& b) {
  auto& d = device(b);
  auto names = config_.sync_tables;
  if (b.contains("tables") && !b.at("tables").is_null()) names = b.at("tables").get<std::vector<std::string>>();
  const auto m = sync::fetch_manifest(connected(*d.link), names);
  json tables_out = json::array();
  for (const auto& e : m.tables) {
    tables_out.push_back({{"table", e.table},
                          {"present", e.present},
                          {"revision", e.revision},
                          {"modified_at", e.modified_at},
                          {"base", e.base ? json(*e.base) : json(nullptr)},
                          {"central_revision", store().revision(e.table)},
                          {"digest", to_hex(e.digest)}});
  }
  return {{"device_id", m.device_id}, {"tables", std::move(tables_out)}};
}

json Service::sync_state(const Caller&, const json&) {
  json out = json::array();
  for (const auto& [id, d] : devices_) {
    out.push_back({{"device", id},
                   {"state", std::string(sync::to_string(d.link->state()))},
                   {"endpoint", d.config.endpoint ? json(*d.config.endpoint) : json(nullptr)},
                   {"bytes_sent", d.link->bytes_sent()},
                   {"bytes_received", d.link->bytes_received()}});
  }
  return out;
}

json Service::sync_connect(const Caller&, const json& b) {
  auto& d = device(b);
  d.link->connect();
  return {{"device", d.config.id}, {"state", std::string(sync::to_string(d.link->state()))}};
}

json Service::sync_disconnect(const Caller&, const json& b) {
  auto& d = device(b);
  d.link->disconnect();
  return {{"device", d.config.id}, {"state", std::string(sync::to_string(d.link->state()))}};
}

json Service::device_put(const Caller&, const json& b) {
  auto& d = device(b);
  const auto path = str_arg(b, "path");
  const auto data = from_hex(str_arg(b, "data"));
  connected(*d.link).copy_to_device(path, data);
  return {{"path", path}, {"bytes", data.size()}};
}

json Service::device_get(const Caller&, const json& b) {
  auto& d = device(b);
  const auto path = str_arg(b, "path");
  const auto data = connected(*d.link).copy_from_device(path);
  return {{"path", path}, {"bytes", data.size()}, {"data", to_hex(data)}};
}

json Service::device_delete(const Caller&, const json& b) {
  auto& d = device(b);
  return status_json(connected(*d.link).delete_file(str_arg(b, "path")));
}

json Service::device_mkdir(const Caller&, const json& b) {
  auto& d = device(b);
  return status_json(connected(*d.link).make_dir(str_arg(b, "path")));
}

json Service::device_rmdir(const Caller&, const json& b) {
  auto& d = device(b);
  return status_json(connected(*d.link).remove_dir(str_arg(b, "path")));
}

json Service::device_stat(const Caller&, const json& b) {
  auto& d = device(b);
  const auto info = connected(*d.link).stat(str_arg(b, "path"));
  return {{"status", std::string(sync::to_string(info.status))},
          {"is_dir", info.is_dir},
          {"size", info.size},
          {"mtime_us", info.mtime_us}};
}

// ---------------------------------------------------------------------------
// Users

namespace {

json user_json(const store::Row& row) {
  return {{"username", text_of(row.at(0))}, {"role", text_of(row.at(1))}, {"enabled", int_of(row.at(3)) != 0}};
}

}  // namespace

json Service::user_create(const Caller& c, const json& b) {
  const auto username = str_arg(b, "username");
  const auto password = str_arg(b, "password");
  if (username.empty()) bad_request("username is empty");
  if (password.empty()) bad_request("password is empty");
  const auto role = role_arg(opt_str(b, "role").value_or("VIEWER"));
  const auto row = store::make_user_row(username, role, password, bool_arg(b, "enabled", true));
  store().insert(c.actor(), tables::kUsers, row);
  return user_json(row);
}

json Service::user_list(const Caller& c, const json&) {
  json out = json::array();
  for (const auto& row : store().rows(c.actor(), tables::kUsers)) out.push_back(user_json(row));
  return out;
}

json Service::user_set(const Caller& c, const json& b) {
  const auto username = str_arg(b, "username");
  auto row = store().get(c.actor(), tables::kUsers, {username});
  if (!row) throw Error(Errc::NotFound, "no user '" + username + "'");
  if (const auto role = opt_str(b, "role")) row->at(1) = std::string(store::to_string(role_arg(*role)));
  if (const auto password = opt_str(b, "password")) {
    if (password->empty()) bad_request("password is empty");
    row->at(2) = store::hash_password(*password);
  }
  if (b.contains("enabled")) row->at(3) = std::int64_t{bool_arg(b, "enabled", true) ? 1 : 0};
  store().upsert(c.actor(), tables::kUsers, *row);
  sessions_.close_user(username);
  return user_json(*row);
}

json Service::user_delete(const Caller& c, const json& b) {
  const auto username = str_arg(b, "username");
  store().remove(c.actor(), tables::kUsers, {username});
  sessions_.close_user(username);
  return json::object();
}

}  // namespace rfidtrace::api
