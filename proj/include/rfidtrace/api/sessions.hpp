#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "rfidtrace/store/authorization.hpp"

namespace rfidtrace::api {

struct ApiSession {
  std::string token;
  std::string username;
  store::Role role = store::Role::Viewer;
  std::chrono::steady_clock::time_point expiry;
};

/// Bearer tokens: 16 random bytes, hex encoded.
class SessionTable {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  explicit SessionTable(std::chrono::seconds lifetime = std::chrono::hours(8), Clock clock = {});

  ApiSession open(const std::string& username, store::Role role);
  /// Unknown and expired tokens are indistinguishable: both yield nullopt.
  std::optional<ApiSession> find(const std::string& token);
  void close(const std::string& token);
  /// Drops every session of a user (after a role change or deletion).
  void close_user(const std::string& username);
  std::size_t size() const;

 private:
  std::chrono::seconds lifetime_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::map<std::string, ApiSession> sessions_;
};

}  // namespace rfidtrace::api
