#include "rfidtrace/api/http_server.hpp"

#include <httplib.h>

#include "rfidtrace/api/error.hpp"

namespace rfidtrace::api {

using nlohmann::json;

std::pair<std::string, int> split_endpoint(const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos || colon == 0) throw Error(Errc::BadConfig, "expected host:port, got '" + listen + "'");
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(listen.substr(colon + 1), &used);
    if (used != listen.size() - colon - 1) port = -1;
  } catch (const std::exception&) {
  }
  if (port < 0 || port > 65535) throw Error(Errc::BadConfig, "bad port in '" + listen + "'");
  return {listen.substr(0, colon), port};
}

namespace {

void send(httplib::Response& res, const Reply& reply) {
  res.status = reply.http_status;
  res.set_content(reply.body.dump(), "application/json");
}

std::optional<std::string> bearer(const httplib::Request& req) {
  const auto header = req.get_header_value("Authorization");
  const std::string prefix = "Bearer ";
  if (header.compare(0, prefix.size(), prefix) == 0) return header.substr(prefix.size());
  return std::string();
}

}  // namespace

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  server_->Post(R"(/api/([A-Za-z0-9_.]+))", [this](const httplib::Request& req, httplib::Response& res) {
    json body = json::object();
    if (!req.body.empty()) {
      try {
        body = json::parse(req.body);
      } catch (const json::parse_error& e) {
        send(res, Reply{400, {{"ok", false}, {"error", {{"code", "api.BadRequest"}, {"message", e.what()}}}}});
        return;
      }
    }
    send(res, service_.call(req.matches[1].str(), body, bearer(req)));
  });
  server_->Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
    send(res, service_.call("health", json::object(), std::string()));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& listen) {
  const auto [host, port] = split_endpoint(listen);
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(Errc::Unavailable, "cannot listen on " + listen);
  return bound;
}

void HttpServer::run() { server_->listen_after_bind(); }

void HttpServer::start() {
  thread_ = std::thread([this] { run(); });
  server_->wait_until_ready();
}

void HttpServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace rfidtrace::api
