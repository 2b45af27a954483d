#pragma once

#include <exception>
#include <string>
#include <string_view>

#include "rfidtrace/common/error.hpp"

namespace rfidtrace::api {

enum class Errc {
  BadRequest,
  InvalidQuery,
  Unauthenticated,
  Forbidden,
  NotFound,
  Conflict,
  Unavailable,
  BadConfig,
};

std::string_view to_string(Errc code);

using Error = BasicError<Errc>;

/// How an exception from any layer is reported to API callers.
struct Failure {
  int http_status = 500;
  /// "<module>.<code>", e.g. "store.DuplicateKey" or "api.InvalidQuery".
  std::string code;
  std::string message;
};

Failure describe_failure(const std::exception& e);

}  // namespace rfidtrace::api
