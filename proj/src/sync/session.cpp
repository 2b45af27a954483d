#include "rfidtrace/sync/session.hpp"

#include <fstream>

#include "rfidtrace/store/persistence.hpp"

namespace rfidtrace::sync {

using store::Actor;
using store::Table;

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Skip: return "SKIP";
    case Direction::Push: return "PUSH";
    case Direction::Pull: return "PULL";
    case Direction::Conflict: return "CONFLICT";
  }
  return "UNKNOWN";
}

Direction decide(const ManifestEntry& device, std::uint64_t central_revision, const Digest& central_digest) {
  const std::uint64_t c = central_revision;
  if (!device.present) return c == 0 ? Direction::Skip : Direction::Push;
  const std::uint64_t d = device.revision;
  if (d == c) return device.digest == central_digest ? Direction::Skip : Direction::Conflict;
  if (device.base && *device.base <= d && *device.base <= c) {
    const auto b = *device.base;
    if (d == b) return Direction::Push;
    if (c == b) return Direction::Pull;
    return Direction::Conflict;
  }
  return d < c ? Direction::Push : Direction::Pull;
}

nlohmann::json to_json(const SyncReport& report) {
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& t : report.tables) {
    nlohmann::json j{{"table", t.table},
                     {"direction", to_string(t.direction)},
                     {"device_present", t.device_present},
                     {"device_revision", t.device_revision},
                     {"central_revision", t.central_revision},
                     {"applied", t.applied},
                     {"body_bytes", t.body_bytes}};
    j["base"] = t.base ? nlohmann::json(*t.base) : nlohmann::json(nullptr);
    j["final_revision"] = t.final_revision ? nlohmann::json(*t.final_revision) : nlohmann::json(nullptr);
    if (!t.winner.empty()) j["winner"] = t.winner;
    if (!t.archive.empty()) j["archive"] = t.archive;
    if (t.narrowed_fields) j["narrowed_fields"] = t.narrowed_fields;
    if (!t.error.empty()) j["error"] = t.error;
    tables.push_back(std::move(j));
  }
  return {{"device_id", report.device_id},      {"tables", tables},
          {"complete", report.complete},        {"digest_verified", report.digest_verified},
          {"error", report.error},              {"bytes_sent", report.bytes_sent},
          {"bytes_received", report.bytes_received}};
}

namespace {

class Session {
 public:
  Session(DeviceLink& link, store::Datastore& central, const SyncOptions& options)
      : link_(link), central_(central), options_(options) {}

  SyncReport run();

 private:
  Message exchange(const Message& request) {
    auto response = link_.exchange(request);
    digest_.add(encode_message(request));
    digest_.add(encode_message(response));
    return response;
  }

  void expect_ok(const Message& response) {
    const auto ack = decode_ack(response);
    if (ack.status != Status::Ok) throw_status(ack.status, ack.text);
  }

  void push(TableOutcome& out, const Table& snapshot);
  Table pull_device_copy(TableOutcome& out);
  void apply_pulled(TableOutcome& out, const Table& device_copy);
  std::string archive(const Table& copy, std::string_view side);
  void process(TableOutcome& out, const ManifestEntry& device);

  DeviceLink& link_;
  store::Datastore& central_;
  const SyncOptions& options_;
  SessionDigest digest_;
};

void Session::push(TableOutcome& out, const Table& snapshot) {
  const auto image = to_compact(snapshot);
  out.narrowed_fields = image.narrowed.size();
  expect_ok(exchange(BodyWriter().str8(out.table).blob(image.bytes).done(MsgType::PushTable)));
  out.body_bytes += image.bytes.size();
  out.applied = true;
  out.final_revision = snapshot.revision;
}

Table Session::pull_device_copy(TableOutcome& out) {
  const auto reply = exchange(BodyWriter().str8(out.table).done(MsgType::PullTable));
  if (reply.type == MsgType::Ack) {
    const auto ack = decode_ack(reply);
    throw_status(ack.status == Status::Ok ? Status::Protocol : ack.status, ack.text);
  }
  if (reply.type != MsgType::Data) throw Error(Errc::Protocol, "expected DATA");
  BodyReader r(reply.body);
  const auto digest = r.digest();
  const auto image = r.blob();
  r.finish();
  if (blake2b(image) != digest) throw Error(Errc::Protocol, "table image digest mismatch for " + out.table);
  out.body_bytes += image.size();
  auto t = from_compact(image);
  if (t.schema.name != out.table) throw Error(Errc::Protocol, "device sent " + t.schema.name + " for " + out.table);
  return t;
}

void Session::apply_pulled(TableOutcome& out, const Table& device_copy) {
  const auto& schema = central_.schema(out.table);
  if (device_copy.schema.columns != schema.columns || device_copy.schema.key != schema.key) {
    throw Error(Errc::Rejected, "device schema for " + out.table + " differs from the central one");
  }
  std::vector<store::Row> rows;
  rows.reserve(device_copy.rows.size());
  for (const auto& [_, row] : device_copy.rows) rows.push_back(row);
  std::uint64_t revision = 0;
  try {
    revision = central_.replace(Actor::internal(), out.table, std::move(rows), out.central_revision);
  } catch (const store::Error&) {
    throw Error(Errc::Rejected, std::string("central ") + out.table + " changed during sync; retry");
  }
  out.applied = true;
  out.final_revision = revision;
  // The central copy already holds the device content; from here on only the
  // revision stamp is missing on the device.
  expect_ok(exchange(BodyWriter().str8(out.table).u64(revision).done(MsgType::SetBase)));
}

std::string Session::archive(const Table& copy, std::string_view side) {
  if (options_.archive_dir.empty()) throw Error(Errc::Rejected, "no conflict archive configured");
  std::filesystem::create_directories(options_.archive_dir);
  const auto stem = copy.schema.name + "-" + std::string(side) + "-rev" + std::to_string(copy.revision);
  auto path = options_.archive_dir / (stem + ".json");
  for (int n = 2; std::filesystem::exists(path); ++n) {
    path = options_.archive_dir / (stem + "-" + std::to_string(n) + ".json");
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [_, row] : copy.rows) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& v : row) cells.push_back(store::value_to_json(v));
    rows.push_back(std::move(cells));
  }
  const nlohmann::json j{{"table", copy.schema.name},      {"side", side},
                         {"device_id", link_.device_id()}, {"revision", copy.revision},
                         {"modified_at", copy.modified_at}, {"schema", copy.schema.to_json()},
                         {"rows", rows}};
  store::replace_file(path, as_bytes(j.dump(2) + "\n"), true);
  return path.string();
}

void Session::process(TableOutcome& out, const ManifestEntry& device) {
  const auto snapshot = central_.table_copy(Actor::internal(), out.table);
  out.central_revision = snapshot.revision;
  Digest central_digest{};  // stays zero when the table does not convert; never equal to a real digest
  try {
    central_digest = content_digest(snapshot);
  } catch (const ConversionError&) {
  }
  out.direction = decide(device, snapshot.revision, central_digest);

  switch (out.direction) {
    case Direction::Skip:
      out.final_revision = snapshot.revision;
      return;
    case Direction::Push:
      push(out, snapshot);
      return;
    case Direction::Pull:
      apply_pulled(out, pull_device_copy(out));
      return;
    case Direction::Conflict: {
      const auto device_copy = pull_device_copy(out);
      const bool device_wins = device.modified_at > snapshot.modified_at;
      out.winner = device_wins ? "device" : "central";
      if (device_wins) {
        out.archive = archive(snapshot, "central");
        apply_pulled(out, device_copy);
      } else {
        out.archive = archive(device_copy, "device");
        push(out, snapshot);
      }
      return;
    }
  }
}

SyncReport Session::run() {
  auto guard = link_.lock_session();
  SyncReport report;
  report.device_id = link_.device_id();
  const auto sent0 = link_.bytes_sent();
  const auto received0 = link_.bytes_received();
  auto finish = [&] {
    report.bytes_sent = link_.bytes_sent() - sent0;
    report.bytes_received = link_.bytes_received() - received0;
    return report;
  };

  for (const auto& name : options_.tables) central_.schema(name);  // UnknownTable before any traffic
  if (options_.tables.size() > 255) throw Error(Errc::Rejected, "too many tables");

  BodyWriter begin;
  begin.u8(static_cast<std::uint8_t>(options_.tables.size()));
  for (const auto& name : options_.tables) begin.str8(name);
  const auto reply = exchange(begin.done(MsgType::Begin));
  if (reply.type != MsgType::Manifest) throw Error(Errc::Protocol, "expected MANIFEST");
  const auto manifest = decode_manifest(reply.body);
  if (manifest.tables.size() != options_.tables.size()) throw Error(Errc::Protocol, "manifest size mismatch");

  for (std::size_t i = 0; i < options_.tables.size(); ++i) {
    const auto& device = manifest.tables[i];
    TableOutcome out;
    out.table = options_.tables[i];
    if (device.table != out.table) throw Error(Errc::Protocol, "manifest order mismatch");
    out.device_present = device.present;
    out.device_revision = device.revision;
    out.base = device.base;
    try {
      process(out, device);
    } catch (const Error& e) {
      out.error = e.what();
      if (e.code() == Errc::DeviceUnreachable || e.code() == Errc::NotConnected) {
        report.error = e.what();
        report.tables.push_back(std::move(out));
        return finish();
      }
    } catch (const store::Error& e) {
      out.error = e.what();
    } catch (const std::filesystem::filesystem_error& e) {
      out.error = e.what();
    }
    report.tables.push_back(std::move(out));
  }

  try {
    const auto ack = decode_ack(link_.exchange(BodyWriter().digest(digest_.value()).done(MsgType::End)));
    report.digest_verified = ack.status == Status::Ok;
    report.complete = true;
    if (!report.digest_verified) report.error = ack.text;
  } catch (const Error& e) {
    report.error = e.what();
  }
  return finish();
}

}  // namespace

SyncReport sync_session(DeviceLink& link, store::Datastore& central, const SyncOptions& options) {
  return Session(link, central, options).run();
}

Manifest fetch_manifest(DeviceLink& link, const std::vector<std::string>& tables) {
  auto guard = link.lock_session();
  if (tables.size() > 255) throw Error(Errc::Rejected, "too many tables");
  BodyWriter begin;
  begin.u8(static_cast<std::uint8_t>(tables.size()));
  for (const auto& name : tables) begin.str8(name);
  const auto request = begin.done(MsgType::Begin);
  const auto reply = link.exchange(request);
  if (reply.type != MsgType::Manifest) throw Error(Errc::Protocol, "expected MANIFEST");
  auto manifest = decode_manifest(reply.body);
  SessionDigest digest;
  digest.add(encode_message(request));
  digest.add(encode_message(reply));
  const auto ack = decode_ack(link.exchange(BodyWriter().digest(digest.value()).done(MsgType::End)));
  if (ack.status != Status::Ok) throw_status(ack.status, ack.text);
  return manifest;
}

}  // namespace rfidtrace::sync
