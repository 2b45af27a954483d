#include "rfidtrace/sync/device_store.hpp"

#include <cctype>
#include <chrono>
#include <fstream>

#include <json.hpp>

#include "rfidtrace/store/persistence.hpp"

namespace rfidtrace::sync {

namespace fs = std::filesystem;
using store::Table;

namespace {

Bytes read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + p.string());
  return Bytes((std::istreambuf_iterator<char>(in)), {});
}

bool valid_table_name(std::string_view name) {
  if (name.empty() || name.size() > 64) return false;
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  }
  return true;
}

std::uint64_t system_now_us() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::system_clock::now().time_since_epoch())
          .count());
}

}  // namespace

CompactStore::CompactStore(fs::path dir, Options options)
    : dir_(std::move(dir)), durable_(options.durable), clock_(options.clock ? options.clock : system_now_us) {
  std::error_code ec;
  fs::create_directories(dir_ / "tables", ec);
  fs::create_directories(dir_ / "files", ec);
  if (ec) throw Error(Errc::Io, "cannot create device directory " + dir_.string() + ": " + ec.message());

  const auto meta_path = dir_ / "device.json";
  if (fs::exists(meta_path)) {
    const auto raw = read_file(meta_path);
    try {
      const auto j = nlohmann::json::parse(raw.begin(), raw.end());
      device_id_ = j.at("device_id").get<std::string>();
      capacity_ = j.at("capacity_bytes").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::Io, meta_path.string() + ": " + e.what());
    }
  } else {
    device_id_ = options.device_id.empty() ? dir_.filename().string() : options.device_id;
    capacity_ = options.capacity_bytes;
    const auto text = nlohmann::json{{"device_id", device_id_}, {"capacity_bytes", capacity_}}.dump(2) + "\n";
    store::replace_file(meta_path, as_bytes(text), durable_);
  }
  if (device_id_.empty() || device_id_.size() > 255) throw Error(Errc::Io, "bad device id in " + meta_path.string());

  for (const auto& de : fs::directory_iterator(dir_ / "tables")) {
    if (de.path().extension() != ".ctd") continue;
    const auto raw = read_file(de.path());
    if (raw.size() < 9) throw Error(Errc::Protocol, de.path().string() + ": truncated");
    Entry e;
    if (raw[0]) e.base = get_le<std::uint64_t>(raw, 1);
    try {
      e.table = from_compact(ByteView(raw).subspan(9));
    } catch (const Error& err) {
      throw Error(err.code(), de.path().string() + ": " + err.detail());
    }
    if (e.table.schema.name != de.path().stem().string()) {
      throw Error(Errc::Protocol, de.path().string() + ": holds table " + e.table.schema.name);
    }
    auto name = e.table.schema.name;
    tables_.emplace(std::move(name), std::move(e));
  }
}

std::vector<std::string> CompactStore::names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [name, _] : tables_) out.push_back(name);
  return out;
}

std::optional<Table> CompactStore::table(std::string_view name) const {
  std::lock_guard lock(mutex_);
  auto it = tables_.find(name);
  if (it == tables_.end()) return std::nullopt;
  return it->second.table;
}

std::optional<std::uint64_t> CompactStore::base(std::string_view name) const {
  std::lock_guard lock(mutex_);
  auto it = tables_.find(name);
  if (it == tables_.end()) return std::nullopt;
  return it->second.base;
}

void CompactStore::write_entry(const Entry& e) const {
  Bytes out;
  out.push_back(e.base ? 1 : 0);
  put_le(out, e.base.value_or(0));
  append(out, to_compact(e.table).bytes);
  store::replace_file(dir_ / "tables" / (e.table.schema.name + ".ctd"), out, durable_);
}

void CompactStore::put_table(const Table& table, std::optional<std::uint64_t> base) {
  if (!valid_table_name(table.schema.name)) throw Error(Errc::Rejected, "bad table name '" + table.schema.name + "'");
  Entry e{narrow(table), base};
  std::lock_guard lock(mutex_);
  write_entry(e);
  tables_.insert_or_assign(table.schema.name, std::move(e));
}

CompactStore::Entry& CompactStore::entry(std::string_view name) {
  auto it = tables_.find(name);
  if (it == tables_.end()) throw Error(Errc::NotFound, "device has no table " + std::string(name));
  return it->second;
}

void CompactStore::set_base(std::string_view name, std::uint64_t revision) {
  std::lock_guard lock(mutex_);
  auto e = entry(name);
  e.table.revision = revision;
  e.base = revision;
  write_entry(e);
  entry(name) = std::move(e);
}

std::uint64_t CompactStore::stamp(const Table& t) const { return std::max(clock_(), t.modified_at); }

std::uint64_t CompactStore::upsert(std::string_view name, store::Row row) {
  std::lock_guard lock(mutex_);
  auto e = entry(name);
  e.table.schema.check_row(row);
  auto key = e.table.schema.key_of(row);
  e.table.rows.insert_or_assign(std::move(key), std::move(row));
  e.table = narrow(e.table);
  ++e.table.revision;
  e.table.modified_at = stamp(e.table);
  write_entry(e);
  entry(name) = std::move(e);
  return entry(name).table.revision;
}

std::uint64_t CompactStore::remove(std::string_view name, const store::Key& key) {
  std::lock_guard lock(mutex_);
  auto e = entry(name);
  if (e.table.rows.erase(key) == 0) throw Error(Errc::NotFound, "no such row in " + std::string(name));
  ++e.table.revision;
  e.table.modified_at = stamp(e.table);
  write_entry(e);
  entry(name) = std::move(e);
  return entry(name).table.revision;
}

fs::path CompactStore::resolve(std::string_view path) const {
  const fs::path rel = fs::path(std::string(path)).lexically_normal();
  if (path.empty() || rel.is_absolute() || rel.has_root_name() || rel.empty() || rel == ".") {
    throw Error(Errc::Rejected, "bad device path '" + std::string(path) + "'");
  }
  for (const auto& part : rel) {
    if (part == "..") throw Error(Errc::Rejected, "device path leaves the file area: '" + std::string(path) + "'");
  }
  return dir_ / "files" / rel;
}

std::uint64_t CompactStore::files_used() const {
  std::uint64_t total = 0;
  for (const auto& de : fs::recursive_directory_iterator(dir_ / "files")) {
    if (de.is_regular_file()) total += de.file_size();
  }
  return total;
}

Status CompactStore::put_file(std::string_view path, ByteView data) {
  const auto p = resolve(path);
  std::lock_guard lock(mutex_);
  std::error_code ec;
  if (fs::is_directory(p, ec)) throw Error(Errc::Rejected, std::string(path) + " is a folder");
  const std::uint64_t old = fs::is_regular_file(p, ec) ? fs::file_size(p) : 0;
  if (files_used() - old + data.size() > capacity_) {
    throw Error(Errc::QuotaExceeded, "device capacity " + std::to_string(capacity_) + " bytes exceeded by " +
                                         std::string(path));
  }
  if (!fs::is_directory(p.parent_path(), ec)) throw Error(Errc::NotFound, "no folder for " + std::string(path));
  store::replace_file(p, data, durable_);
  return Status::Ok;
}

std::optional<Bytes> CompactStore::get_file(std::string_view path) const {
  const auto p = resolve(path);
  std::lock_guard lock(mutex_);
  if (!fs::is_regular_file(p)) return std::nullopt;
  return read_file(p);
}

Status CompactStore::delete_file(std::string_view path) {
  const auto p = resolve(path);
  std::lock_guard lock(mutex_);
  if (!fs::is_regular_file(p)) return Status::NotFound;
  fs::remove(p);
  return Status::Ok;
}

Status CompactStore::make_dir(std::string_view path) {
  const auto p = resolve(path);
  std::lock_guard lock(mutex_);
  if (fs::is_directory(p)) return Status::AlreadyExists;
  if (fs::exists(p)) throw Error(Errc::Rejected, std::string(path) + " is a file");
  fs::create_directories(p);
  return Status::Ok;
}

Status CompactStore::remove_dir(std::string_view path) {
  const auto p = resolve(path);
  std::lock_guard lock(mutex_);
  if (!fs::is_directory(p)) return Status::NotFound;
  fs::remove_all(p);
  return Status::Ok;
}

StatInfo CompactStore::stat(std::string_view path) const {
  const auto p = resolve(path);
  std::lock_guard lock(mutex_);
  std::error_code ec;
  const auto st = fs::status(p, ec);
  if (ec || !fs::exists(st)) return StatInfo{Status::NotFound, false, 0, 0};
  StatInfo info;
  info.is_dir = fs::is_directory(st);
  info.size = info.is_dir ? 0 : fs::file_size(p);
  const auto sys = std::chrono::file_clock::to_sys(fs::last_write_time(p));
  info.mtime_us = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(sys.time_since_epoch()).count());
  return info;
}

}  // namespace rfidtrace::sync
