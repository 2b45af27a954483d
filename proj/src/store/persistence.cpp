#include "rfidtrace/store/persistence.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rfidtrace::store {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSnapshot = "snapshot.json";
constexpr const char* kJournal = "journal.jsonl";
constexpr const char* kSealed = "store.enc";
constexpr const char* kLock = "lock";

[[noreturn]] void io_error(const std::string& what) {
  throw Error(Errc::Io, what + ": " + std::strerror(errno));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void fsync_dir(const fs::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

void add_missing_builtins(TableSet& set) {
  for (const auto& s : builtin_schemas()) {
    if (!set.has(s.name)) set.add_table(s);
  }
}

TableSet parse_snapshot(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::Corrupt, origin + ": " + e.what());
  }
  auto set = TableSet::from_json(j);
  add_missing_builtins(set);
  return set;
}

/// Replays complete journal lines; returns the byte length of that prefix.
std::size_t replay_journal(TableSet& set, const fs::path& path) {
  if (!fs::exists(path)) return 0;
  const auto text = read_file(path);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // interrupted append
    ++line_no;
    const auto line = std::string_view(text).substr(pos, nl - pos);
    try {
      const auto j = json::parse(line);
      const auto& table = set.table(j.at("table").get<std::string>());
      const auto change = change_from_json(j, table.schema);
      if (change.revision > table.revision) set.apply(change);
    } catch (const json::exception& e) {
      throw Error(Errc::Corrupt, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(Errc::Corrupt, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    pos = nl + 1;
  }
  return pos;
}

}  // namespace

void replace_file(const fs::path& path, ByteView bytes, bool durable) {
  const auto tmp = path.string() + ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
  if (fd < 0) io_error("cannot create " + tmp);
  std::size_t off = 0;
  while (off < bytes.size()) {
    auto n = ::write(fd, bytes.data() + off, bytes.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      ::close(fd);
      io_error("cannot write " + tmp);
    }
    off += static_cast<std::size_t>(n);
  }
  if (durable && ::fsync(fd) != 0) {
    ::close(fd);
    io_error("cannot sync " + tmp);
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) io_error("cannot rename " + tmp);
  if (durable) fsync_dir(path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

TableSet load_store(const fs::path& dir, const StoreOptions& options) {
  const bool sealed = fs::exists(dir / kSealed);
  const bool plain = fs::exists(dir / kSnapshot) || fs::exists(dir / kJournal);
  if (sealed && plain) throw Error(Errc::Corrupt, dir.string() + " holds both plain and encrypted stores");
  if (sealed) {
    if (!options.passphrase) throw Error(Errc::WrongPassphrase, dir.string() + " is encrypted; no passphrase given");
    SealingKey key(*options.passphrase, options.kdf);
    const auto bytes = read_file(dir / kSealed);
    const auto plain_bytes = key.open(as_bytes(bytes));
    return parse_snapshot(rfidtrace::to_string(plain_bytes), (dir / kSealed).string());
  }
  if (plain && options.passphrase) {
    throw Error(Errc::UnsupportedVersion, dir.string() + " holds an unencrypted store");
  }
  TableSet set = fs::exists(dir / kSnapshot)
                     ? parse_snapshot(read_file(dir / kSnapshot), (dir / kSnapshot).string())
                     : TableSet::central();
  replay_journal(set, dir / kJournal);
  return set;
}

StoreDirectory::StoreDirectory(fs::path dir, StoreOptions options, Datastore::Clock clock)
    : dir_(std::move(dir)), options_(std::move(options)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + dir_.string() + ": " + ec.message());

  lock_fd_ = ::open((dir_ / kLock).c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0600);
  if (lock_fd_ < 0) io_error("cannot open lock in " + dir_.string());
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    throw Error(Errc::Io, dir_.string() + " is in use by another process");
  }

  try {
    const bool has_plain = fs::exists(dir_ / kSnapshot) || fs::exists(dir_ / kJournal);
    TableSet tables;
    if (options_.passphrase) {
      if (has_plain) throw Error(Errc::UnsupportedVersion, dir_.string() + " holds an unencrypted store");
      key_ = std::make_unique<SealingKey>(*options_.passphrase, options_.kdf);
      if (fs::exists(dir_ / kSealed)) {
        const auto bytes = read_file(dir_ / kSealed);
        tables = parse_snapshot(rfidtrace::to_string(key_->open(as_bytes(bytes))), (dir_ / kSealed).string());
      } else {
        tables = TableSet::central();
        write_sealed(tables);
      }
    } else {
      if (fs::exists(dir_ / kSealed)) {
        throw Error(Errc::WrongPassphrase, dir_.string() + " is encrypted; no passphrase given");
      }
      tables = fs::exists(dir_ / kSnapshot)
                   ? parse_snapshot(read_file(dir_ / kSnapshot), (dir_ / kSnapshot).string())
                   : TableSet::central();
      const auto valid = replay_journal(tables, dir_ / kJournal);
      journal_fd_ = ::open((dir_ / kJournal).c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0600);
      if (journal_fd_ < 0) io_error("cannot open journal in " + dir_.string());
      // Drop an interrupted trailing record so the next append starts clean.
      if (::ftruncate(journal_fd_, static_cast<off_t>(valid)) != 0) io_error("cannot trim journal");
    }
    store_ = std::make_unique<Datastore>(std::move(tables), std::move(clock));
    store_->set_change_sink([this](const Change& c, const TableSet& t) { persist(c, t); });
  } catch (...) {
    if (journal_fd_ >= 0) ::close(journal_fd_);
    ::close(lock_fd_);
    throw;
  }
}

StoreDirectory::~StoreDirectory() {
  if (store_) store_->set_change_sink({});
  if (journal_fd_ >= 0) ::close(journal_fd_);
  if (lock_fd_ >= 0) ::close(lock_fd_);
}

void StoreDirectory::persist(const Change& change, const TableSet& tables) {
  if (key_) {
    write_sealed(tables);
    return;
  }
  auto line = change_to_json(change).dump();
  line.push_back('\n');
  std::size_t off = 0;
  while (off < line.size()) {
    auto n = ::write(journal_fd_, line.data() + off, line.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) io_error("cannot append to journal");
    off += static_cast<std::size_t>(n);
  }
  if (options_.durable && ::fdatasync(journal_fd_) != 0) io_error("cannot sync journal");
}

void StoreDirectory::write_sealed(const TableSet& tables) {
  const auto text = tables.canonical();
  replace_file(dir_ / kSealed, key_->seal(as_bytes(text)), options_.durable);
}

void StoreDirectory::checkpoint() {
  if (key_) return;
  store_->exclusive([&](const TableSet& tables) {
    replace_file(dir_ / kSnapshot, as_bytes(tables.canonical()), options_.durable);
    if (::ftruncate(journal_fd_, 0) != 0) io_error("cannot reset journal");
    if (options_.durable) ::fsync(journal_fd_);
  });
}

}  // namespace rfidtrace::store
