#pragma once

#include <optional>
#include <string_view>

namespace rfidtrace::store {

enum class Role { Viewer, Operator, Admin };

std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view name);

enum class Access { Read, Upsert, Delete };

std::string_view to_string(Access access);

/// VIEWER reads everything except users; OPERATOR additionally writes every
/// table except users; ADMIN may do anything. Defined for every table name,
/// including unknown ones (treated like an ordinary table).
bool allowed(Role role, std::string_view table, Access access) noexcept;

}  // namespace rfidtrace::store
