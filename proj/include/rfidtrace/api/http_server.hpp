#pragma once

#include <memory>
#include <string>
#include <thread>

#include "rfidtrace/api/service.hpp"

namespace httplib {
class Server;
}

namespace rfidtrace::api {

/// HTTP front of a Service:
///   POST /api/<endpoint>   JSON body, "Authorization: Bearer <token>"
///   GET  /api/health
/// Every response is the JSON envelope of Service::call with its status code.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  /// Binds "host:port"; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& listen);
  /// Serves until stop(); call after bind().
  void run();
  /// run() on a background thread.
  void start();
  void stop();

 private:
  Service& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

/// "host:port" split; throws BadConfig.
std::pair<std::string, int> split_endpoint(const std::string& listen);

}  // namespace rfidtrace::api
