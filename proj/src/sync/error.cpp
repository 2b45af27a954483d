#include "rfidtrace/sync/error.hpp"

namespace rfidtrace::sync {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::NotConnected: return "NotConnected";
    case Errc::DeviceUnreachable: return "DeviceUnreachable";
    case Errc::NotFound: return "NotFound";
    case Errc::QuotaExceeded: return "QuotaExceeded";
    case Errc::ConversionLoss: return "ConversionLoss";
    case Errc::Busy: return "Busy";
    case Errc::Protocol: return "Protocol";
    case Errc::Rejected: return "Rejected";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string describe(const std::vector<ConversionIssue>& issues) {
  std::string text;
  const std::size_t shown = std::min<std::size_t>(issues.size(), 8);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& is = issues[i];
    if (!text.empty()) text += "; ";
    text += is.table + " key [";
    for (std::size_t k = 0; k < is.key.size(); ++k) {
      if (k) text += ",";
      text += store::display(is.key[k]);
    }
    text += "] " + is.column + ": " + is.reason;
  }
  if (issues.size() > shown) text += "; and " + std::to_string(issues.size() - shown) + " more";
  return text;
}

}  // namespace

ConversionError::ConversionError(std::vector<ConversionIssue> issues)
    : Error(Errc::ConversionLoss, describe(issues)), issues_(std::move(issues)) {}

}  // namespace rfidtrace::sync
