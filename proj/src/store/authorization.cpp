#include "rfidtrace/store/authorization.hpp"

#include "rfidtrace/store/schema.hpp"

namespace rfidtrace::store {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Viewer: return "VIEWER";
    case Role::Operator: return "OPERATOR";
    case Role::Admin: return "ADMIN";
  }
  return "?";
}

std::optional<Role> parse_role(std::string_view name) {
  if (name == "VIEWER") return Role::Viewer;
  if (name == "OPERATOR") return Role::Operator;
  if (name == "ADMIN") return Role::Admin;
  return std::nullopt;
}

std::string_view to_string(Access access) {
  switch (access) {
    case Access::Read: return "read";
    case Access::Upsert: return "upsert";
    case Access::Delete: return "delete";
  }
  return "?";
}

bool allowed(Role role, std::string_view table, Access access) noexcept {
  if (role == Role::Admin) return true;
  // Password hashes live in users; only administrators see or touch it.
  if (table == tables::kUsers) return false;
  if (access == Access::Read) return true;
  return role == Role::Operator;
}

}  // namespace rfidtrace::store
