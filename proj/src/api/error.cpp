#include "rfidtrace/api/error.hpp"

#include <json.hpp>

#include "rfidtrace/codec/field.hpp"
#include "rfidtrace/net/frame.hpp"
#include "rfidtrace/rf/field.hpp"
#include "rfidtrace/store/value.hpp"
#include "rfidtrace/sync/error.hpp"

namespace rfidtrace::api {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::BadRequest: return "BadRequest";
    case Errc::InvalidQuery: return "InvalidQuery";
    case Errc::Unauthenticated: return "Unauthenticated";
    case Errc::Forbidden: return "Forbidden";
    case Errc::NotFound: return "NotFound";
    case Errc::Conflict: return "Conflict";
    case Errc::Unavailable: return "Unavailable";
    case Errc::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

namespace {

int status_of(Errc c) {
  switch (c) {
    case Errc::BadRequest:
    case Errc::InvalidQuery: return 400;
    case Errc::Unauthenticated: return 401;
    case Errc::Forbidden: return 403;
    case Errc::NotFound: return 404;
    case Errc::Conflict: return 409;
    case Errc::Unavailable: return 503;
    case Errc::BadConfig: return 500;
  }
  return 500;
}

int status_of(store::Errc c) {
  using E = store::Errc;
  switch (c) {
    case E::Unauthorized:
    case E::Disabled: return 403;
    case E::BadCredentials: return 401;
    case E::DuplicateKey:
    case E::Corrupt: return 409;
    case E::NotFound: return 404;
    case E::UnknownTable:
    case E::UnknownColumn:
    case E::TypeMismatch:
    case E::BadFilter:
    case E::BadPattern:
    case E::BadRule: return 400;
    default: return 500;
  }
}

int status_of(codec::Errc c) {
  using E = codec::Errc;
  switch (c) {
    case E::UnknownTemplate: return 404;
    case E::DuplicateTemplate: return 409;
    case E::BadMagic:
    case E::CrcMismatch:
    case E::TruncatedPayload:
    case E::MalformedBody: return 422;
    default: return 400;
  }
}

int status_of(rf::Errc c) {
  using E = rf::Errc;
  switch (c) {
    case E::TagNotFound:
    case E::UnknownReader: return 404;
    case E::DuplicateUid: return 409;
    default: return 400;
  }
}

int status_of(net::Errc c) {
  using E = net::Errc;
  switch (c) {
    case E::StationTimeout: return 504;
    case E::TagNotFound:
    case E::UnknownStation: return 404;
    case E::AuthFailed: return 403;
    case E::DuplicateAddress:
    case E::TooManyStations:
    case E::BlockLocked: return 409;
    case E::BadAddress:
    case E::BadRequest:
    case E::PayloadTooLarge:
    case E::BlockOutOfRange: return 400;
    default: return 502;
  }
}

int status_of(sync::Errc c) {
  using E = sync::Errc;
  switch (c) {
    case E::NotConnected:
    case E::Busy:
    case E::Rejected: return 409;
    case E::DeviceUnreachable: return 503;
    case E::NotFound: return 404;
    case E::QuotaExceeded: return 507;
    case E::ConversionLoss: return 422;
    case E::Protocol: return 502;
    case E::Io: return 500;
  }
  return 500;
}

template <typename E>
bool try_describe(const std::exception& e, std::string_view module, Failure& out) {
  const auto* err = dynamic_cast<const BasicError<E>*>(&e);
  if (!err) return false;
  out.http_status = status_of(err->code());
  out.code = std::string(module) + "." + std::string(to_string(err->code()));
  out.message = err->detail().empty() ? std::string(err->what()) : err->detail();
  return true;
}

}  // namespace

Failure describe_failure(const std::exception& e) {
  Failure f;
  if (try_describe<Errc>(e, "api", f) || try_describe<store::Errc>(e, "store", f) ||
      try_describe<codec::Errc>(e, "codec", f) || try_describe<rf::Errc>(e, "rf", f) ||
      try_describe<net::Errc>(e, "net", f) || try_describe<sync::Errc>(e, "sync", f)) {
    return f;
  }
  if (dynamic_cast<const nlohmann::json::exception*>(&e) || dynamic_cast<const std::invalid_argument*>(&e) ||
      dynamic_cast<const std::out_of_range*>(&e)) {
    return {400, "api.BadRequest", e.what()};
  }
  return {500, "api.Internal", e.what()};
}

}  // namespace rfidtrace::api
