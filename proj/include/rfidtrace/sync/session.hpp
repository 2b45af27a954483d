#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfidtrace/store/datastore.hpp"
#include "rfidtrace/sync/device_link.hpp"

namespace rfidtrace::sync {

enum class Direction { Skip, Push, Pull, Conflict };

std::string_view to_string(Direction d);

/// Per-table decision from the handshake.
///   equal revisions                  SKIP, or CONFLICT if the content differs
///   base known, device still at base PUSH
///   base known, central still at base PULL
///   both moved past the base         CONFLICT
///   no usable base                   the higher revision wins (PUSH or PULL)
/// A table the device lacks is pushed unless the central one was never written.
Direction decide(const ManifestEntry& device, std::uint64_t central_revision, const Digest& central_digest);

struct TableOutcome {
  std::string table;
  Direction direction = Direction::Skip;
  bool device_present = false;
  std::uint64_t device_revision = 0;
  std::uint64_t central_revision = 0;
  std::optional<std::uint64_t> base;
  /// Revision both sides hold afterwards (when applied).
  std::optional<std::uint64_t> final_revision;
  /// CONFLICT: "central" or "device".
  std::string winner;
  /// CONFLICT: where the losing copy was written.
  std::string archive;
  bool applied = false;
  /// Compact image bytes moved for this table.
  std::uint64_t body_bytes = 0;
  /// Reals narrowed inexactly on a push.
  std::size_t narrowed_fields = 0;
  std::string error;
};

struct SyncReport {
  std::string device_id;
  std::vector<TableOutcome> tables;
  /// Every table was attempted and the END exchange completed.
  bool complete = false;
  bool digest_verified = false;
  std::string error;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
};

nlohmann::json to_json(const SyncReport& report);

struct SyncOptions {
  /// Subscribed tables, synced in this order.
  std::vector<std::string> tables;
  /// Losing copies of conflicts go here as <table>-<side>-rev<r>.json.
  std::filesystem::path archive_dir;
};

/// Runs one differential session. Throws NotConnected or DeviceUnreachable
/// when the handshake itself fails, Busy when a session is already running.
/// Later link failures end the session early and are reported, with every
/// table either fully transferred or untouched.
SyncReport sync_session(DeviceLink& link, store::Datastore& central, const SyncOptions& options);

/// Reads the device's manifest for `tables` in an empty session (no table
/// traffic, nothing changes on either side).
Manifest fetch_manifest(DeviceLink& link, const std::vector<std::string>& tables);

}  // namespace rfidtrace::sync
