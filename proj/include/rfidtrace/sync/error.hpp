#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rfidtrace/common/error.hpp"
#include "rfidtrace/store/value.hpp"

namespace rfidtrace::sync {

enum class Errc {
  NotConnected,
  DeviceUnreachable,
  NotFound,
  QuotaExceeded,
  ConversionLoss,
  Busy,
  Protocol,
  Rejected,
  Io,
};

std::string_view to_string(Errc code);

using Error = BasicError<Errc>;

/// One record field that does not fit the compact limits.
struct ConversionIssue {
  std::string table;
  store::Key key;
  std::string column;
  std::string reason;
};

/// ConversionLoss carrying every offending field.
class ConversionError : public Error {
 public:
  explicit ConversionError(std::vector<ConversionIssue> issues);
  const std::vector<ConversionIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConversionIssue> issues_;
};

}  // namespace rfidtrace::sync
