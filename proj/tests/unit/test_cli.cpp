#include <doctest.h>

#include "rfidtrace/api/http_server.hpp"
#include "rfidtrace/api/service.hpp"
#include "rfidtrace/api/config.hpp"
#include "rfidtrace/store/persistence.hpp"
#include "rfidtrace/store/report.hpp"
#include "support/api_rig.hpp"
#include "support/cli_rig.hpp"

using namespace rfidtrace;
using gen::CliRig;
using nlohmann::json;

TEST_CASE("events query on an empty store exits 0") {
  CliRig cli;
  const auto r = cli.local({"events", "--kind", "ALARM", "--limit", "10"});
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  CHECK(r.out.find("total: 0") != std::string::npos);
  const auto j = cli.local({"--json", "events", "--kind", "ALARM"});
  CHECK(json::parse(j.out) == json{{"total", 0}, {"events", json::array()}});
}

TEST_CASE("usage errors exit 2, operational errors exit 1") {
  CliRig cli;
  auto r = cli.local({"bogus"});
  CHECK(r.code == 2);
  CHECK(r.err.find("Usage") != std::string::npos);
  r = CliRig::raw({"health"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--config or --server") != std::string::npos);
  r = cli.local({"events", "--limit", "many"});
  CHECK(r.code == 2);
  r = cli.local({"tag", "write", "--station", "3", "--uid", "E004010000000001", "--template", "1", "--set", "noequals"});
  CHECK(r.code == 2);
  r = cli.local({"events", "--limit", "0"});
  CHECK(r.code == 1);
  CHECK(r.err.find("api.InvalidQuery") != std::string::npos);
  r = cli.local({"report", "render", "nothing"});
  CHECK(r.code == 1);
  CHECK(r.err.find("api.NotFound") != std::string::npos);
  r = CliRig::raw({"--config", cli.path("missing.json"), "health"});
  CHECK(r.code == 1);
  r = CliRig::raw({"--server", "127.0.0.1:1", "health"});
  CHECK(r.code == 1);
  CHECK(r.err.find("cannot reach server") != std::string::npos);
}

TEST_CASE("json output is the API result") {
  CliRig cli(R"({"tags": [{"uid": "E004010000000001", "reader": 3, "position_cm": 10}]})");
  cli.write("tmpl.json", gen::asset_template().dump());
  REQUIRE(cli.local({"template", "define", cli.path("tmpl.json")}).code == 0);
  REQUIRE(cli.local({"tag", "write", "--station", "3", "--uid", "E004010000000001", "--template", "1", "--set",
                     "loc=A1", "--set", "qty=3", "--set", "price=0.5", "--set", "grade=k"})
              .code == 0);
  const auto read = cli.local({"--json", "tag", "read", "--station", "3", "--uid", "E004010000000001"});
  REQUIRE(read.code == 0);
  const auto state = cli.local({"--json", "world", "state"});
  const auto health = cli.local({"--json", "health"});

  auto cfg = api::load_config(cli.path("config.json"));
  api::Service service(cfg);
  // State first: reading a tag advances the simulated clock.
  CHECK(json::parse(state.out) == service.call("sim.state", json::object(), std::nullopt).body.at("result"));
  CHECK(json::parse(read.out).at("values") ==
        service.call("tag.read", {{"station", 3}, {"uid", "E004010000000001"}}, std::nullopt).body.at("result").at("values"));
  CHECK(json::parse(health.out).at("store") == service.call("health", json::object(), std::nullopt).body.at("result").at("store"));
  CHECK(json::parse(read.out).at("values") == json{{"loc", "A1"}, {"qty", 3}, {"price", 0.5}, {"grade", "k"}});
}

TEST_CASE("report render writes exactly the datastore rendering") {
  CliRig cli(R"({"tags": [{"uid": "E004010000000001", "reader": 3, "position_cm": 90}]})");
  REQUIRE(cli.local({"alarm", "define", "wl", "--trigger", "watchlist_seen", "--uid", "E004010000000001"}).code == 0);
  REQUIRE(cli.local({"world", "move", "E004010000000001", "--position-cm", "5"}).code == 0);
  REQUIRE(cli.local({"poll"}).code == 0);
  REQUIRE(cli.local({"report", "define", "al", "--source", "events", "--filter", "kind = ALARM", "--columns",
                     "station,seq,kind,uid"})
              .code == 0);
  const auto printed = cli.local({"report", "render", "al"});
  REQUIRE(cli.local({"report", "render", "al", "-o", cli.path("al.csv")}).code == 0);

  const auto tables = store::load_store(cli.path("store"), {std::nullopt, store::KdfParams::minimal(), false});
  const store::ReportPattern p{"al", "events", "kind = ALARM", {"station", "seq", "kind", "uid"}, "",
                               store::ReportFormat::Csv};
  const auto expected = store::render_report(p, tables);
  CHECK(printed.out == expected);
  CHECK(cli.read("al.csv") == expected);
  CHECK(expected == "station,seq,kind,uid\n255,1,ALARM,E004010000000001\n");
}

TEST_CASE("remote mode with login, token and roles") {
  CliRig cli;
  REQUIRE(cli.local({"init", "--admin-password", "root-pw"}).code == 0);
  REQUIRE(cli.local({"user", "create", "olga", "--password", "op-pw", "--role", "operator"}).code == 0);

  auto cfg = api::load_config(cli.path("config.json"));
  api::Service service(cfg);
  api::HttpServer http(service);
  const auto port = http.bind("127.0.0.1:0");
  http.start();
  const std::string server = "127.0.0.1:" + std::to_string(port);

  auto login = CliRig::raw({"--server", server, "login", "olga", "--password", "op-pw"});
  REQUIRE(login.code == 0);
  const auto token = login.out.substr(0, login.out.find('\n'));
  CHECK(token.size() == 32);

  auto r = CliRig::raw({"--server", server, "events"});
  CHECK(r.code == 1);
  CHECK(r.err.find("api.Unauthenticated") != std::string::npos);
  r = CliRig::raw({"--server", server, "--token", token, "--json", "events", "--kind", "ALARM"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out).at("total") == 0);
  r = CliRig::raw({"--server", server, "--token", token, "user", "list"});
  CHECK(r.code == 1);
  CHECK(r.err.find("api.Forbidden") != std::string::npos);
  r = CliRig::raw({"--server", server, "--token", token, "whoami"});
  CHECK(r.out.find("username: olga") != std::string::npos);

  setenv("RFIDTRACE_TOKEN", token.c_str(), 1);
  CHECK(CliRig::raw({"--server", server, "poll"}).code == 0);
  CHECK(CliRig::raw({"--server", server, "logout"}).code == 0);
  CHECK(CliRig::raw({"--server", server, "poll"}).code == 1);
  unsetenv("RFIDTRACE_TOKEN");

  r = CliRig::raw({"--server", server, "login", "olga", "--password", "wrong"});
  CHECK(r.code == 1);
  CHECK(r.err.find("store.BadCredentials") != std::string::npos);
  http.stop();
}

TEST_CASE("device files round-trip through the client") {
  CliRig cli;
  std::string blob;
  for (int i = 0; i < 3000; ++i) blob.push_back(static_cast<char>(i * 37 % 256));
  cli.write("blob.bin", blob);
  REQUIRE(cli.local({"device", "mkdir", "hh1", "maps"}).code == 0);
  REQUIRE(cli.local({"device", "put", "hh1", cli.path("blob.bin"), "maps/site.bin"}).code == 0);
  REQUIRE(cli.local({"device", "get", "hh1", "maps/site.bin", "-o", cli.path("back.bin")}).code == 0);
  CHECK(cli.read("back.bin") == blob);
  const auto stat = cli.local({"--json", "device", "stat", "hh1", "maps/site.bin"});
  CHECK(json::parse(stat.out).at("size") == 3000);
  CHECK(cli.local({"sync", "run", "hh1"}).code == 0);
  const auto again = cli.local({"--json", "sync", "run", "hh1"});
  for (const auto& t : json::parse(again.out).at("tables")) CHECK(t.at("body_bytes") == 0);
}

TEST_CASE("raw call subcommand") {
  CliRig cli;
  const auto r = cli.local({"call", "events.query", R"({"order": "desc"})"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out).at("total") == 0);
  CHECK(cli.local({"call", "events.query", "{"}).code == 2);
}
