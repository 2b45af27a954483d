#include "rfidtrace/store/credentials.hpp"

#include <sodium.h>

#include <stdexcept>

namespace rfidtrace::store {

namespace {

void ensure_sodium() {
  static const bool ready = sodium_init() >= 0;
  if (!ready) throw std::runtime_error("libsodium initialization failed");
}

const std::string& dummy_hash() {
  static const std::string h = hash_password("rfidtrace-dummy-password");
  return h;
}

}  // namespace

std::string hash_password(std::string_view password) {
  ensure_sodium();
  char out[crypto_pwhash_STRBYTES];
  if (crypto_pwhash_str(out, password.data(), password.size(), crypto_pwhash_OPSLIMIT_INTERACTIVE,
                        crypto_pwhash_MEMLIMIT_INTERACTIVE) != 0) {
    throw std::runtime_error("password hashing ran out of memory");
  }
  return out;
}

bool verify_password(std::string_view hash, std::string_view password) {
  ensure_sodium();
  if (hash.size() >= crypto_pwhash_STRBYTES) return false;
  std::string terminated(hash);
  return crypto_pwhash_str_verify(terminated.c_str(), password.data(), password.size()) == 0;
}

Identity authenticate(const Datastore& store, std::string_view username, std::string_view password) {
  const auto row = store.get(Actor::internal(), tables::kUsers, Key{std::string(username)});
  if (!row) {
    verify_password(dummy_hash(), password);
    throw Error(Errc::BadCredentials);
  }
  const auto& hash = std::get<std::string>((*row)[2]);
  if (!verify_password(hash, password)) throw Error(Errc::BadCredentials);
  if (std::get<std::int64_t>((*row)[3]) == 0) throw Error(Errc::Disabled, std::string(username));
  const auto role = parse_role(std::get<std::string>((*row)[1]));
  if (!role) throw Error(Errc::Corrupt, "user '" + std::string(username) + "' has an unknown role");
  return Identity{std::string(username), *role};
}

Row make_user_row(std::string_view username, Role role, std::string_view password, bool enabled) {
  if (username.empty()) throw Error(Errc::TypeMismatch, "empty username");
  return Row{std::string(username), std::string(to_string(role)), hash_password(password),
             std::int64_t{enabled ? 1 : 0}};
}

}  // namespace rfidtrace::store
