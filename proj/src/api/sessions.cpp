#include "rfidtrace/api/sessions.hpp"

#include <sodium.h>

#include "rfidtrace/common/hex.hpp"

namespace rfidtrace::api {

SessionTable::SessionTable(std::chrono::seconds lifetime, Clock clock)
    : lifetime_(lifetime), clock_(clock ? std::move(clock) : [] { return std::chrono::steady_clock::now(); }) {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
}

ApiSession SessionTable::open(const std::string& username, store::Role role) {
  std::uint8_t raw[16];
  randombytes_buf(raw, sizeof raw);
  ApiSession s{to_hex(ByteView(raw, sizeof raw)), username, role, clock_() + lifetime_};
  std::lock_guard lock(mutex_);
  std::erase_if(sessions_, [now = clock_()](const auto& kv) { return kv.second.expiry <= now; });
  sessions_[s.token] = s;
  return s;
}

std::optional<ApiSession> SessionTable::find(const std::string& token) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(token);
  if (it == sessions_.end()) return std::nullopt;
  if (it->second.expiry <= clock_()) {
    sessions_.erase(it);
    return std::nullopt;
  }
  return it->second;
}

void SessionTable::close(const std::string& token) {
  std::lock_guard lock(mutex_);
  sessions_.erase(token);
}

void SessionTable::close_user(const std::string& username) {
  std::lock_guard lock(mutex_);
  std::erase_if(sessions_, [&](const auto& kv) { return kv.second.username == username; });
}

std::size_t SessionTable::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

}  // namespace rfidtrace::api
