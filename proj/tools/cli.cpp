#include "cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <pthread.h>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "rfidtrace/api/config.hpp"
#include "rfidtrace/api/error.hpp"
#include "rfidtrace/api/http_server.hpp"
#include "rfidtrace/api/service.hpp"
#include "rfidtrace/common/hex.hpp"
#include "rfidtrace/sync/device_agent.hpp"

namespace rfidtrace::cli {

using nlohmann::json;

namespace {

/// Thrown for operational failures reported by the service.
struct Failed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown for bad command lines that CLI11 cannot catch itself.
struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Backend {
 public:
  virtual ~Backend() = default;
  /// Returns the result or throws Failed with "<code>: <message>".
  json call(const std::string& endpoint, const json& body) {
    const auto envelope = exchange(endpoint, body);
    if (envelope.value("ok", false)) return envelope.value("result", json());
    const auto& e = envelope.at("error");
    throw Failed(e.value("code", "?") + ": " + e.value("message", ""));
  }

 protected:
  virtual json exchange(const std::string& endpoint, const json& body) = 0;
};

class LocalBackend : public Backend {
 public:
  explicit LocalBackend(const std::string& config) : service_(api::load_config(config)) {}
  api::Service& service() { return service_; }

 protected:
  json exchange(const std::string& endpoint, const json& body) override {
    return service_.call(endpoint, body, std::nullopt).body;
  }

 private:
  api::Service service_;
};

class RemoteBackend : public Backend {
 public:
  RemoteBackend(const std::string& server, std::string token) : token_(std::move(token)) {
    const auto [host, port] = api::split_endpoint(server);
    client_ = std::make_unique<httplib::Client>(host, port);
    client_->set_connection_timeout(5);
    client_->set_read_timeout(120);
  }

 protected:
  json exchange(const std::string& endpoint, const json& body) override {
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    const auto res = client_->Post("/api/" + endpoint, headers, body.dump(), "application/json");
    if (!res) throw Failed("cannot reach server: " + httplib::to_string(res.error()));
    try {
      return json::parse(res->body);
    } catch (const json::parse_error&) {
      throw Failed("server answered HTTP " + std::to_string(res->status) + " without a JSON body");
    }
  }

 private:
  std::string token_;
  std::unique_ptr<httplib::Client> client_;
};

std::string cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "-";
  return v.dump();
}

void print_table(const json& rows, std::ostream& out) {
  std::vector<std::string> cols;
  for (const auto& row : rows) {
    for (const auto& [k, _] : row.items()) {
      if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
    }
  }
  std::vector<std::size_t> width;
  for (const auto& c : cols) width.push_back(c.size());
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      width[i] = std::max(width[i], cell(row.value(cols[i], json())).size());
    }
  }
  auto line = [&](auto get) {
    std::string text;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      auto v = get(i);
      if (i + 1 < cols.size()) v.resize(width[i] + 2, ' ');
      text += v;
    }
    out << text << "\n";
  };
  line([&](std::size_t i) { return cols[i]; });
  for (const auto& row : rows) line([&](std::size_t i) { return cell(row.value(cols[i], json())); });
}

bool table_like(const json& v) {
  return v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), [](const json& r) { return r.is_object(); });
}

void print_human(const json& v, std::ostream& out) {
  if (table_like(v)) {
    print_table(v, out);
  } else if (v.is_array()) {
    for (const auto& item : v) out << cell(item) << "\n";
  } else if (v.is_object()) {
    for (const auto& [k, item] : v.items()) {
      if (table_like(item)) {
        out << k << ":\n";
        print_table(item, out);
      } else {
        out << k << ": " << cell(item) << "\n";
      }
    }
  } else {
    out << cell(v) << "\n";
  }
}

json parse_json_arg(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Usage(what + " is not valid JSON: " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failed("cannot read " + path);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  f << data;
  if (!f) throw Failed("cannot write " + path);
}

/// `name=value` pairs; the value is JSON when it parses, otherwise text.
json values_from_pairs(const std::vector<std::string>& pairs) {
  json values = json::object();
  for (const auto& p : pairs) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw Usage("expected name=value, got '" + p + "'");
    const auto raw = p.substr(eq + 1);
    json v;
    try {
      v = json::parse(raw);
    } catch (const json::parse_error&) {
      v = raw;
    }
    values[p.substr(0, eq)] = v;
  }
  return values;
}

sigset_t stop_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  return set;
}

void wait_for_stop_signal(const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rfidtrace: RFID traceability service and client", "rfidtrace"};
  app.require_subcommand(1);

  std::string config_path;
  std::string server;
  std::string token;
  bool as_json = false;
  app.add_option("--config", config_path, "Service config file (work on the store directly)");
  app.add_option("--server", server, "Service address host:port");
  app.add_option("--token", token, "Session token (default: $RFIDTRACE_TOKEN)");
  app.add_flag("--json", as_json, "Print results as JSON");

  std::unique_ptr<Backend> backend;
  auto connect = [&]() -> Backend& {
    if (backend) return *backend;
    if (!config_path.empty() && !server.empty()) throw Usage("--config and --server are exclusive");
    if (!config_path.empty()) {
      backend = std::make_unique<LocalBackend>(config_path);
    } else if (!server.empty()) {
      if (token.empty()) {
        if (const char* env = std::getenv("RFIDTRACE_TOKEN")) token = env;
      }
      backend = std::make_unique<RemoteBackend>(server, token);
    } else {
      throw Usage("either --config or --server is required");
    }
    return *backend;
  };

  std::function<int()> action;
  // Runs an endpoint and prints its result.
  auto simple = [&](std::string endpoint, std::function<json()> body) {
    return [&, endpoint, body] {
      action = [&, endpoint, body] {
        const auto result = connect().call(endpoint, body());
        if (as_json) {
          out << result.dump(2) << "\n";
        } else {
          print_human(result, out);
        }
        return 0;
      };
    };
  };

  // init
  auto* init = app.add_subcommand("init", "Create the store and its first administrator");
  std::string admin_user = "admin";
  std::string admin_password;
  init->add_option("--admin-user", admin_user, "Administrator name");
  init->add_option("--admin-password", admin_password, "Administrator password")->required();
  init->callback([&] {
    action = [&] {
      if (config_path.empty()) throw Usage("init works on a local store: --config is required");
      auto& b = connect();
      b.call("user.create", {{"username", admin_user}, {"password", admin_password}, {"role", "ADMIN"}});
      out << "store ready; administrator " << admin_user << " created\n";
      return 0;
    };
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string listen_override;
  serve->add_option("--listen", listen_override, "host:port (overrides the config)");
  serve->callback([&] {
    action = [&] {
      if (config_path.empty()) throw Usage("serve needs --config");
      const auto signals = stop_signals();
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);
      auto cfg = api::load_config(config_path);
      if (!listen_override.empty()) cfg.listen = listen_override;
      api::Service service(cfg);
      api::HttpServer http(service);
      const auto port = http.bind(cfg.listen);
      http.start();
      service.start_polling();
      out << "listening on " << api::split_endpoint(cfg.listen).first << ":" << port << std::endl;
      wait_for_stop_signal(signals);
      service.stop_polling();
      http.stop();
      return 0;
    };
  });

  // device-agent
  auto* agent = app.add_subcommand("device-agent", "Serve a handheld's compact store over TCP");
  std::string agent_dir;
  std::string agent_id;
  std::string agent_listen = "127.0.0.1:7700";
  std::uint64_t agent_capacity = 64ull << 20;
  agent->add_option("--dir", agent_dir, "Device store directory")->required();
  agent->add_option("--id", agent_id, "Device id (used when the directory is new)");
  agent->add_option("--listen", agent_listen, "host:port");
  agent->add_option("--capacity", agent_capacity, "File area capacity in bytes");
  agent->callback([&] {
    action = [&] {
      const auto signals = stop_signals();
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);
      sync::CompactStore store(agent_dir, {agent_id, agent_capacity, true, {}});
      const auto [host, port] = api::split_endpoint(agent_listen);
      sync::TcpListener listener(host, static_cast<std::uint16_t>(port));
      out << "device " << store.device_id() << " listening on " << host << ":" << listener.port() << std::endl;
      std::thread worker([&] {
        sync::DeviceAgent device(store);
        while (auto channel = listener.accept()) {
          try {
            device.serve(*channel);
          } catch (const std::exception& e) {
            err << "connection ended: " << e.what() << "\n";
          }
        }
      });
      wait_for_stop_signal(signals);
      listener.close();
      worker.join();
      return 0;
    };
  });

  // health, login, logout, whoami
  app.add_subcommand("health", "Service status")->callback(simple("health", [] { return json::object(); }));
  auto* login = app.add_subcommand("login", "Open a session and print its token");
  std::string login_user;
  std::string login_password;
  login->add_option("username", login_user)->required();
  login->add_option("--password", login_password)->required();
  login->callback([&] {
    action = [&] {
      const auto r = connect().call("login", {{"username", login_user}, {"password", login_password}});
      if (as_json) {
        out << r.dump(2) << "\n";
      } else {
        out << r.at("token").get<std::string>() << "\n";
      }
      return 0;
    };
  });
  app.add_subcommand("logout", "Close the session")->callback(simple("logout", [] { return json::object(); }));
  app.add_subcommand("whoami", "Show the session's user")->callback(simple("whoami", [] { return json::object(); }));

  // template
  auto* tmpl = app.add_subcommand("template", "Tag templates");
  tmpl->require_subcommand(1);
  std::string template_file;
  auto* tdef = tmpl->add_subcommand("define", "Register a template document");
  tdef->add_option("file", template_file, "Template JSON document")->required();
  tdef->callback(simple("template.define", [&] { return parse_json_arg(read_file(template_file), template_file); }));
  tmpl->add_subcommand("list", "List templates")->callback(simple("template.list", [] { return json::object(); }));
  std::uint32_t tid = 0;
  std::uint32_t tver = 0;
  auto* tget = tmpl->add_subcommand("get", "Show one template");
  tget->add_option("template_id", tid)->required();
  tget->add_option("version", tver)->required();
  tget->callback(simple("template.get", [&] { return json{{"template_id", tid}, {"version", tver}}; }));
  auto* tdel = tmpl->add_subcommand("delete", "Delete one template version");
  tdel->add_option("template_id", tid)->required();
  tdel->add_option("version", tver)->required();
  tdel->callback(simple("template.delete", [&] { return json{{"template_id", tid}, {"version", tver}}; }));

  // tag
  auto* tag = app.add_subcommand("tag", "Tag memory through a station");
  tag->require_subcommand(1);
  std::uint32_t tag_station = 0;
  std::string tag_uid;
  std::string tag_values;
  std::vector<std::string> tag_sets;
  auto* twrite = tag->add_subcommand("write", "Encode values and write them to a tag");
  twrite->add_option("--station", tag_station)->required();
  twrite->add_option("--uid", tag_uid)->required();
  twrite->add_option("--template", tid, "Template id")->required();
  twrite->add_option("--version", tver, "Template version");
  twrite->add_option("--values", tag_values, "Values as a JSON object");
  twrite->add_option("--set", tag_sets, "name=value (repeatable)");
  twrite->callback(simple("tag.write", [&] {
    json values = tag_values.empty() ? values_from_pairs(tag_sets) : parse_json_arg(tag_values, "--values");
    if (!tag_values.empty() && !tag_sets.empty()) throw Usage("use either --values or --set");
    return json{{"station", tag_station}, {"uid", tag_uid}, {"template_id", tid}, {"version", tver}, {"values", values}};
  }));
  auto* tread = tag->add_subcommand("read", "Read and decode a tag");
  tread->add_option("--station", tag_station)->required();
  tread->add_option("--uid", tag_uid)->required();
  tread->callback(simple("tag.read", [&] { return json{{"station", tag_station}, {"uid", tag_uid}}; }));

  // station
  auto* station = app.add_subcommand("station", "Station configuration");
  station->require_subcommand(1);
  station->add_subcommand("list", "List stations")->callback(simple("station.list", [] { return json::object(); }));
  auto* sset = station->add_subcommand("set", "Change a station's settings");
  std::uint32_t st_addr = 0;
  std::uint32_t st_baud = 0;
  std::uint32_t st_new_addr = 0;
  std::string st_password;
  std::string st_name;
  sset->add_option("addr", st_addr)->required();
  auto* baud_opt = sset->add_option("--baud-class", st_baud, "0..4");
  auto* new_addr_opt = sset->add_option("--new-addr", st_new_addr, "0..29");
  auto* pw_opt = sset->add_option("--password", st_password, "4 characters");
  auto* name_opt = sset->add_option("--name", st_name);
  sset->callback(simple("station.set", [&, baud_opt, new_addr_opt, pw_opt, name_opt] {
    json b{{"addr", st_addr}};
    if (baud_opt->count()) b["baud_class"] = st_baud;
    if (new_addr_opt->count()) b["new_addr"] = st_new_addr;
    if (pw_opt->count()) b["password"] = st_password;
    if (name_opt->count()) b["name"] = st_name;
    return b;
  }));

  // inventory, poll
  auto* inv = app.add_subcommand("inventory", "Run an inventory at a station");
  inv->add_option("--station", tag_station)->required();
  inv->callback(simple("inventory", [&] { return json{{"station", tag_station}}; }));
  app.add_subcommand("poll", "Collect events from every station")->callback(simple("poll", [] { return json::object(); }));

  // events
  auto* events = app.add_subcommand("events", "Query the event journal");
  std::uint32_t ev_station = 0;
  std::string ev_kind;
  std::string ev_uid;
  std::uint64_t ev_from = 0;
  std::uint64_t ev_to = 0;
  std::uint64_t ev_offset = 0;
  std::uint64_t ev_limit = 100;
  bool ev_desc = false;
  auto* ev_station_opt = events->add_option("--station", ev_station);
  auto* ev_kind_opt = events->add_option("--kind", ev_kind, "TAG_ENTER, TAG_LEAVE, ALARM, ...");
  auto* ev_uid_opt = events->add_option("--uid", ev_uid);
  auto* ev_from_opt = events->add_option("--from-us", ev_from);
  auto* ev_to_opt = events->add_option("--to-us", ev_to);
  events->add_option("--offset", ev_offset);
  events->add_option("--limit", ev_limit, "1..1000");
  events->add_flag("--desc", ev_desc, "Newest first");
  events->callback(simple("events.query", [&, ev_station_opt, ev_kind_opt, ev_uid_opt, ev_from_opt, ev_to_opt] {
    json q{{"offset", ev_offset}, {"limit", ev_limit}, {"order", ev_desc ? "desc" : "asc"}};
    if (ev_station_opt->count()) q["station"] = ev_station;
    if (ev_kind_opt->count()) q["kind"] = ev_kind;
    if (ev_uid_opt->count()) q["uid"] = ev_uid;
    if (ev_from_opt->count()) q["from_us"] = ev_from;
    if (ev_to_opt->count()) q["to_us"] = ev_to;
    return q;
  }));

  // alarm
  auto* alarm = app.add_subcommand("alarm", "Alarm rules");
  alarm->require_subcommand(1);
  auto* adef = alarm->add_subcommand("define", "Create or replace a rule");
  std::string al_name;
  std::string al_trigger;
  std::vector<std::string> al_uids;
  std::vector<std::uint32_t> al_stations;
  double al_silent = 0;
  adef->add_option("name", al_name)->required();
  adef->add_option("--trigger", al_trigger, "watchlist_seen, station_silent or event_buffer_overrun")->required();
  adef->add_option("--uid", al_uids, "Watchlisted uid (repeatable)");
  adef->add_option("--station", al_stations, "Watched station (repeatable; default all)");
  auto* silent_opt = adef->add_option("--silent-after-s", al_silent, "Silence that trips station_silent");
  adef->callback(simple("alarm.define", [&, silent_opt] {
    json r{{"name", al_name}, {"trigger", al_trigger}, {"stations", al_stations}};
    if (!al_uids.empty()) r["uids"] = al_uids;
    if (silent_opt->count()) r["silent_after_s"] = al_silent;
    return r;
  }));
  alarm->add_subcommand("list", "List rules")->callback(simple("alarm.list", [] { return json::object(); }));
  auto* adel = alarm->add_subcommand("delete", "Delete a rule");
  adel->add_option("name", al_name)->required();
  adel->callback(simple("alarm.delete", [&] { return json{{"name", al_name}}; }));

  // report
  auto* report = app.add_subcommand("report", "Report patterns");
  report->require_subcommand(1);
  std::string rp_name;
  std::string rp_source;
  std::string rp_filter;
  std::string rp_columns;
  std::string rp_sort;
  std::string rp_format = "csv";
  std::string rp_output;
  auto* rdef = report->add_subcommand("define", "Create or replace a pattern");
  rdef->add_option("name", rp_name)->required();
  rdef->add_option("--source", rp_source, "Source table")->required();
  rdef->add_option("--filter", rp_filter, "e.g. \"kind = ALARM AND station = 255\"");
  rdef->add_option("--columns", rp_columns, "Comma-separated column list");
  rdef->add_option("--sort", rp_sort, "Column, prefix - for descending");
  rdef->add_option("--format", rp_format, "csv or html");
  rdef->callback(simple("report.define", [&] {
    return json{{"name", rp_name}, {"source", rp_source}, {"filter", rp_filter},
                {"columns", rp_columns}, {"sort", rp_sort}, {"format", rp_format}};
  }));
  report->add_subcommand("list", "List patterns")->callback(simple("report.list", [] { return json::object(); }));
  auto* rdel = report->add_subcommand("delete", "Delete a pattern");
  rdel->add_option("name", rp_name)->required();
  rdel->callback(simple("report.delete", [&] { return json{{"name", rp_name}}; }));
  auto* rrender = report->add_subcommand("render", "Render a pattern");
  rrender->add_option("name", rp_name)->required();
  rrender->add_option("--output,-o", rp_output, "Write the report to a file");
  rrender->callback([&] {
    action = [&] {
      const auto r = connect().call("report.render", {{"name", rp_name}});
      if (!rp_output.empty()) {
        write_file(rp_output, r.at("content").get<std::string>());
      } else if (as_json) {
        out << r.dump(2) << "\n";
      } else {
        out << r.at("content").get<std::string>();
      }
      return 0;
    };
  });

  // world (simulation)
  auto* world = app.add_subcommand("world", "Simulated world");
  world->require_subcommand(1);
  std::string world_file;
  auto* wload = world->add_subcommand("load", "Replace the world with a world document");
  wload->add_option("file", world_file)->required();
  wload->callback(simple("sim.load", [&] { return json{{"world", parse_json_arg(read_file(world_file), world_file)}}; }));
  std::string w_uid;
  double w_pos = 0;
  std::uint32_t w_reader = 0;
  bool w_out = false;
  auto* wmove = world->add_subcommand("move", "Move a tag");
  wmove->add_option("uid", w_uid)->required();
  wmove->add_option("--position-cm", w_pos)->required();
  auto* reader_opt = wmove->add_option("--reader", w_reader, "Reader whose field the tag enters");
  auto* out_flag = wmove->add_flag("--out", w_out, "Take the tag out of every field");
  reader_opt->excludes(out_flag);
  wmove->callback(simple("sim.move", [&, reader_opt] {
    json b{{"uid", w_uid}, {"position_cm", w_pos}};
    if (reader_opt->count()) b["reader"] = w_reader;
    if (w_out) b["reader"] = nullptr;
    return b;
  }));
  std::uint32_t w_blocks = 64;
  std::uint32_t w_block_size = 4;
  std::string w_memory;
  auto* wadd = world->add_subcommand("add-tag", "Place a new tag");
  wadd->add_option("uid", w_uid)->required();
  auto* add_reader_opt = wadd->add_option("--reader", w_reader);
  wadd->add_option("--position-cm", w_pos);
  wadd->add_option("--block-count", w_blocks);
  wadd->add_option("--block-size", w_block_size);
  wadd->add_option("--memory", w_memory, "Initial memory image (hex)");
  wadd->callback(simple("sim.add_tag", [&, add_reader_opt] {
    json b{{"uid", w_uid}, {"position_cm", w_pos}, {"block_count", w_blocks}, {"block_size", w_block_size}};
    if (add_reader_opt->count()) b["reader"] = w_reader;
    if (!w_memory.empty()) b["memory"] = w_memory;
    return b;
  }));
  std::uint64_t w_us = 0;
  auto* wadv = world->add_subcommand("advance", "Advance the simulated clock");
  wadv->add_option("microseconds", w_us)->required();
  wadv->callback(simple("sim.advance", [&] { return json{{"us", w_us}}; }));
  world->add_subcommand("state", "Show the world")->callback(simple("sim.state", [] { return json::object(); }));

  // sync
  auto* syncc = app.add_subcommand("sync", "Handheld synchronization");
  syncc->require_subcommand(1);
  std::string dev_id;
  std::vector<std::string> sync_tables;
  auto* srun = syncc->add_subcommand("run", "Run a sync session");
  srun->add_option("device", dev_id)->required();
  srun->add_option("--table", sync_tables, "Table to sync (repeatable; default: configured set)");
  srun->callback(simple("sync.run", [&] {
    json b{{"device", dev_id}};
    if (!sync_tables.empty()) b["tables"] = sync_tables;
    return b;
  }));
  auto* sman = syncc->add_subcommand("manifest", "Show the device manifest");
  sman->add_option("device", dev_id)->required();
  sman->callback(simple("sync.manifest", [&] { return json{{"device", dev_id}}; }));
  syncc->add_subcommand("state", "Show device links")->callback(simple("sync.state", [] { return json::object(); }));
  auto* scon = syncc->add_subcommand("connect", "Connect a device link");
  scon->add_option("device", dev_id)->required();
  scon->callback(simple("sync.connect", [&] { return json{{"device", dev_id}}; }));
  auto* sdis = syncc->add_subcommand("disconnect", "Disconnect a device link");
  sdis->add_option("device", dev_id)->required();
  sdis->callback(simple("sync.disconnect", [&] { return json{{"device", dev_id}}; }));

  // device (file area)
  auto* dev = app.add_subcommand("device", "Handheld file area");
  dev->require_subcommand(1);
  std::string dev_path;
  std::string dev_local;
  auto* dput = dev->add_subcommand("put", "Copy a local file to the device");
  dput->add_option("device", dev_id)->required();
  dput->add_option("local", dev_local)->required();
  dput->add_option("path", dev_path)->required();
  dput->callback(simple("device.put", [&] {
    return json{{"device", dev_id}, {"path", dev_path}, {"data", to_hex(as_bytes(read_file(dev_local)))}};
  }));
  auto* dget = dev->add_subcommand("get", "Copy a device file");
  dget->add_option("device", dev_id)->required();
  dget->add_option("path", dev_path)->required();
  dget->add_option("--output,-o", dev_local, "Local file (default: standard output)");
  dget->callback([&] {
    action = [&] {
      const auto r = connect().call("device.get", {{"device", dev_id}, {"path", dev_path}});
      const auto data = from_hex(r.at("data").get<std::string>());
      const std::string text(data.begin(), data.end());
      if (!dev_local.empty()) {
        write_file(dev_local, text);
      } else if (as_json) {
        out << r.dump(2) << "\n";
      } else {
        out << text;
      }
      return 0;
    };
  });
  for (const auto& [name, endpoint, help] : {std::tuple{"delete", "device.delete", "Delete a device file"},
                                             std::tuple{"mkdir", "device.mkdir", "Create a device folder"},
                                             std::tuple{"rmdir", "device.rmdir", "Remove a device folder"},
                                             std::tuple{"stat", "device.stat", "Show a device path"}}) {
    auto* sub = dev->add_subcommand(name, help);
    sub->add_option("device", dev_id)->required();
    sub->add_option("path", dev_path)->required();
    sub->callback(simple(endpoint, [&] { return json{{"device", dev_id}, {"path", dev_path}}; }));
  }

  // user
  auto* user = app.add_subcommand("user", "User accounts");
  user->require_subcommand(1);
  std::string u_name;
  std::string u_password;
  std::string u_role;
  bool u_enable = false;
  bool u_disable = false;
  auto* ucreate = user->add_subcommand("create", "Create a user");
  ucreate->add_option("username", u_name)->required();
  ucreate->add_option("--password", u_password)->required();
  ucreate->add_option("--role", u_role, "VIEWER, OPERATOR or ADMIN")->required();
  ucreate->callback(simple("user.create", [&] {
    return json{{"username", u_name}, {"password", u_password}, {"role", u_role}};
  }));
  user->add_subcommand("list", "List users")->callback(simple("user.list", [] { return json::object(); }));
  auto* uset = user->add_subcommand("set", "Change a user");
  uset->add_option("username", u_name)->required();
  auto* u_pw_opt = uset->add_option("--password", u_password);
  auto* u_role_opt = uset->add_option("--role", u_role);
  auto* enable_flag = uset->add_flag("--enable", u_enable);
  auto* disable_flag = uset->add_flag("--disable", u_disable);
  enable_flag->excludes(disable_flag);
  uset->callback(simple("user.set", [&, u_pw_opt, u_role_opt] {
    json b{{"username", u_name}};
    if (u_pw_opt->count()) b["password"] = u_password;
    if (u_role_opt->count()) b["role"] = u_role;
    if (u_enable) b["enabled"] = true;
    if (u_disable) b["enabled"] = false;
    return b;
  }));
  auto* udel = user->add_subcommand("delete", "Delete a user");
  udel->add_option("username", u_name)->required();
  udel->callback(simple("user.delete", [&] { return json{{"username", u_name}}; }));

  // call: any endpoint with a raw JSON body
  auto* raw = app.add_subcommand("call", "Call an API endpoint with a JSON body");
  std::string raw_endpoint;
  std::string raw_body = "{}";
  raw->add_option("endpoint", raw_endpoint)->required();
  raw->add_option("body", raw_body);
  raw->callback([&] {
    action = [&] {
      out << connect().call(raw_endpoint, parse_json_arg(raw_body, "body")).dump(2) << "\n";
      return 0;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    err << app.help();
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const Usage& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Failed& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    const auto f = api::describe_failure(e);
    err << "error: " << f.code << ": " << f.message << "\n";
    return 1;
  }
}

}  // namespace rfidtrace::cli
