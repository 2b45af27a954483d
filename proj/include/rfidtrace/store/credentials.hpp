#pragma once

#include <string>
#include <string_view>

#include "rfidtrace/store/datastore.hpp"

namespace rfidtrace::store {

/// Argon2id string hash (libsodium crypto_pwhash_str format).
std::string hash_password(std::string_view password);
/// Constant-time check; false on any malformed hash.
bool verify_password(std::string_view hash, std::string_view password);

struct Identity {
  std::string username;
  Role role = Role::Viewer;
};

/// Checks against the users table. Unknown users cost the same hash work as
/// known ones. Throws BadCredentials or Disabled (only after the password
/// verified).
Identity authenticate(const Datastore& store, std::string_view username, std::string_view password);

/// Users-table row: username, role, password_hash, enabled.
Row make_user_row(std::string_view username, Role role, std::string_view password, bool enabled = true);

}  // namespace rfidtrace::store
