// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exit status is the number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fixtures/frame_fixtures.hpp"
#include "oracles/singulation_oracle.hpp"
#include "rfidtrace/api/config.hpp"
#include "rfidtrace/api/error.hpp"
#include "rfidtrace/codec/codec.hpp"
#include "rfidtrace/codec/registry.hpp"
#include "rfidtrace/common/hex.hpp"
#include "rfidtrace/net/event_ring.hpp"
#include "rfidtrace/net/frame.hpp"
#include "rfidtrace/net/master.hpp"
#include "rfidtrace/net/station.hpp"
#include "rfidtrace/rf/inventory.hpp"
#include "rfidtrace/rf/world.hpp"
#include "rfidtrace/store/authorization.hpp"
#include "rfidtrace/store/datastore.hpp"
#include "rfidtrace/store/persistence.hpp"
#include "rfidtrace/store/sealed_container.hpp"
#include "support/generators.hpp"
#include "support/net_rig.hpp"
#include "support/store_gen.hpp"
#include "support/sync_rig.hpp"
#include "support/worlds.hpp"

using namespace rfidtrace;
namespace T = store::tables;

namespace {

// Wall-clock budgets.
constexpr double kCodecBudgetS = 30.0;
constexpr double kAntiCollisionBudgetS = 60.0;
constexpr double kEndToEndBudgetS = 10.0;

// Sizes.
constexpr int kCodecRoundtrips = 10000;
constexpr int kCorruptionFixtures = 100;
constexpr int kWorlds = 100;
constexpr int kThroughputReads = 1000;
constexpr double kMinReadRate = 40.0;
constexpr double kMaxReadRate = 200.0;
constexpr int kRingPushes = 300;
constexpr std::uint32_t kFirstRetained = 46;
constexpr int kMinGoldenFrames = 10;
constexpr int kFuzzRounds = 500;
constexpr int kFaultRuns = 50;
constexpr int kMutations = 1000;
constexpr int kTamperFlips = 100;

/// Collects failed expectations for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream s;
    s << count_ - failed_ << "/" << count_ << " checks";
    for (const auto& f : failures_) s << "; " << f;
    return s.str();
  }
  void note(std::string text) { notes_ += (notes_.empty() ? "" : ", ") + std::move(text); }
  const std::string& notes() const { return notes_; }

 private:
  std::uint64_t count_ = 0;
  std::uint64_t failed_ = 0;
  std::vector<std::string> failures_;
  std::string notes_;
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<void(Check&)>& body) {
  Check check;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    check.expect(false, std::string("exception: ") + e.what());
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_s > 0) {
    char t[64];
    std::snprintf(t, sizeof t, "runtime %.2f s < %.0f s", elapsed, budget_s);
    check.expect(elapsed < budget_s, t);
  }
  char took[32];
  std::snprintf(took, sizeof took, "%.2f s", elapsed);
  std::cout << (check.ok() ? "PASS " : "FAIL ") << name << " [" << check.summary();
  if (!check.notes().empty()) std::cout << "; " << check.notes();
  std::cout << "; " << took << "]" << std::endl;
  if (!check.ok()) ++failures;
}

void codec_roundtrip(Check& c) {
  using namespace codec;
  gen::Rng rng(7001);
  TemplateRegistry registry;
  std::vector<Template> templates;
  for (std::uint16_t id = 0; id < 200; ++id) {
    templates.push_back(gen::random_template(rng, id, static_cast<std::uint8_t>(id % 4)));
    registry.add(templates.back());
  }
  std::set<FieldKind> kinds;
  int failed = 0;
  for (int i = 0; i < kCodecRoundtrips; ++i) {
    const auto& t = templates[gen::uniform(rng, 0, templates.size() - 1)];
    const auto p = gen::random_payload(rng, t);
    for (const auto& f : t.fields) kinds.insert(f.type.kind());
    try {
      if (!(decode(encode(t, p), registry) == p)) ++failed;
    } catch (const std::exception&) {
      ++failed;
    }
  }
  c.expect(failed == 0, std::to_string(failed) + " roundtrip failures");
  c.expect(kinds.size() == 4, "all four field types exercised");
  c.note(std::to_string(kCodecRoundtrips) + " roundtrips");

  std::uint64_t corruptions = 0;
  std::uint64_t accepted = 0;
  for (int n = 0; n < kCorruptionFixtures; ++n) {
    const auto& t = templates[static_cast<std::size_t>(n) % templates.size()];
    const auto good = encode(t, gen::random_payload(rng, t));
    for (std::size_t pos = 0; pos < good.size(); ++pos) {
      for (int v = 0; v < 256; ++v) {
        if (v == good[pos]) continue;
        auto bad = good;
        bad[pos] = static_cast<std::uint8_t>(v);
        ++corruptions;
        try {
          decode(bad, registry);
          ++accepted;
        } catch (const codec::Error&) {
        }
      }
    }
  }
  c.expect(accepted == 0, std::to_string(accepted) + " corrupted images accepted");
  c.note(std::to_string(corruptions) + " corruptions of " + std::to_string(kCorruptionFixtures) + " fixtures");
}

void anti_collision(Check& c) {
  using namespace rf;
  const auto geometry = default_profile("long").geometry;
  const SlotTiming timing;
  std::mt19937_64 rng(7002);

  std::vector<std::vector<std::uint64_t>> crafted;
  {
    // 16 tags in one first-level slot plus one second-level repeat.
    std::vector<std::uint64_t> s;
    for (std::uint64_t n = 0; n < 16; ++n) s.push_back(gen::family_uid(0xA00 | (n << 4) | 0x5));
    s.push_back(gen::family_uid(0xB00 | (3u << 4) | 0x5));
    crafted.push_back(s);
    // 64 tags agreeing on their low 12 bits.
    crafted.push_back(gen::random_uids(rng, 64, 12));
    // Two tags differing only in the top nibble of the low 56 bits.
    crafted.push_back({gen::family_uid(0x01000000000000ull), gen::family_uid(0x02000000000000ull)});
    // 32 tags agreeing on 24 low bits.
    crafted.push_back(gen::random_uids(rng, 32, 24));
  }

  int worlds = 0;
  for (int w = 0; w < kWorlds; ++w) {
    std::vector<std::uint64_t> uids;
    if (static_cast<std::size_t>(w) < crafted.size()) {
      uids = crafted[static_cast<std::size_t>(w)];
    } else {
      const auto n = static_cast<std::size_t>(rng() % 64) + 1;
      const unsigned shared = (w % 3 == 0) ? 4u * static_cast<unsigned>(rng() % 4 + 1) : 0u;
      uids = gen::random_uids(rng, n, shared);
    }
    const auto tags = gen::place(rng, uids, 2 * geometry.read_range_cm);
    std::vector<std::uint64_t> present;
    for (const auto& t : tags) {
      if (t.position_cm() <= geometry.read_range_cm) present.push_back(t.uid().value());
    }
    std::sort(present.begin(), present.end());

    const auto r = inventory(tags, geometry, timing);
    const auto o = oracle::singulate(present);
    std::vector<std::uint64_t> got;
    for (const auto& u : r.uids) got.push_back(u.value());
    const auto tag = "world " + std::to_string(w);
    c.expect(got == present, tag + ": uid set differs from range filter");
    c.expect(o.uids == present, tag + ": oracle uid set differs from range filter");
    c.expect(r.rounds_used == o.rounds, tag + ": rounds differ from oracle");
    c.expect(r.duration_us == std::uint64_t{o.rounds} * 16 * timing.slot_duration_us, tag + ": duration differs");
    ++worlds;
  }
  c.note(std::to_string(worlds) + " worlds, " + std::to_string(crafted.size()) + " crafted");
}

void throughput(Check& c) {
  rf::World world;
  world.add_reader(1, rf::default_profile("standard"));
  const auto uid = gen::tag_uid(1);
  world.add_tag(rf::TagEmulation(uid, 64, 4, 5.0), 1);
  const auto start = world.now_us();
  for (int i = 0; i < kThroughputReads; ++i) world.read_blocks(1, uid, static_cast<std::size_t>(i % 64), 1);
  const double seconds = static_cast<double>(world.now_us() - start) / 1e6;
  const double rate = kThroughputReads / seconds;
  char t[96];
  std::snprintf(t, sizeof t, "%.1f reads per simulated second over %d reads", rate, kThroughputReads);
  c.note(t);
  c.expect(rate >= kMinReadRate && rate <= kMaxReadRate, t);
}

void station_limits(Check& c) {
  net::InProcessBus bus;
  net::Master master(bus);
  for (std::uint8_t a = 0; a < 30; ++a) master.register_station(a, gen::kPassword);
  int refused = 0;
  for (int a = 0; a < 256; ++a) {
    try {
      master.register_station(static_cast<std::uint8_t>(a), gen::kPassword);
    } catch (const net::Error&) {
      ++refused;
    }
  }
  c.expect(refused == 256, "a 31st station was accepted");
  c.expect(master.roster().size() == 30, "roster holds 30 stations");

  auto cfg = nlohmann::json{{"store", "s"}, {"stations", nlohmann::json::array()}};
  for (int i = 0; i < 31; ++i) cfg["stations"].push_back({{"addr", i % 30}, {"reader", 100 + i}});
  bool config_refused = false;
  try {
    api::config_from_json(cfg, ".");
  } catch (const api::Error&) {
    config_refused = true;
  }
  c.expect(config_refused, "a 31-station configuration was accepted");

  net::EventRing ring;
  int warnings = 0;
  for (std::uint32_t s = 1; s <= kRingPushes; ++s) {
    warnings += ring.push(net::EventRecord{s, 1, net::EventKind::TagEnter, std::nullopt, s}).crossed_warning_threshold;
  }
  const auto kept = ring.read(0);
  bool contiguous = kept.size() == kRingPushes - kFirstRetained + 1;
  for (std::size_t i = 0; contiguous && i < kept.size(); ++i) contiguous = kept[i].seq == kFirstRetained + i;
  c.expect(contiguous, "ring keeps exactly seq 46..300");
  c.expect(warnings == 1, "one warning for the first crossing");

  // Drain below the threshold and climb again: a second crossing, a second warning.
  std::uint32_t seq = kRingPushes;
  ring.acknowledge(kRingPushes - 100);
  for (int i = 0; i < 300; ++i) {
    ++seq;
    warnings += ring.push(net::EventRecord{seq, 1, net::EventKind::TagEnter, std::nullopt, seq}).crossed_warning_threshold;
  }
  c.expect(warnings == 2, "one warning per crossing");

  // Through a station and the bus: the master collects the newest 255.
  gen::NetRig rig;
  auto& station = rig.add_station(3);
  for (int i = 0; i < kRingPushes; ++i) station.record(net::EventKind::TagEnter, gen::tag_uid(1));
  const auto polled = rig.master.poll_cycle();
  std::vector<std::uint32_t> seqs;
  int station_warnings = 0;
  for (const auto& s : polled.batches) {
    for (const auto& e : s.events) {
      seqs.push_back(e.seq);
      station_warnings += e.kind == net::EventKind::BufferOverrunWarning;
    }
  }
  c.expect(seqs.size() == 255 && seqs.back() == station.last_seq(), "poll delivers the newest 255 events");
  c.expect(station_warnings == 1, "the station records one overrun warning");
}

void frame_protocol(Check& c) {
  const auto& golden = fixtures::frame_fixtures();
  c.expect(static_cast<int>(golden.size()) >= kMinGoldenFrames, "at least ten golden frames");
  bool ping = false;
  for (const auto& fx : golden) {
    const auto bytes = from_hex(fx.frame_hex);
    const auto f = net::frame_decode(bytes);
    c.expect(f.addr == fx.addr && f.cmd == fx.cmd && f.payload == from_hex(fx.payload_hex),
             std::string(fx.name) + " decodes");
    c.expect(net::frame_encode(fx.addr, fx.cmd, from_hex(fx.payload_hex)) == bytes, std::string(fx.name) + " encodes");
    ping = ping || std::string(fx.frame_hex) == "AA 05 01 00 5D 14";
  }
  c.expect(ping, "PING example present");

  std::mt19937_64 rng(7003);
  auto random_frame = [&] {
    net::Frame f;
    const auto a = rng() % 31;
    f.addr = a == 30 ? net::kBroadcast : static_cast<std::uint8_t>(a);
    f.cmd = static_cast<std::uint8_t>(rng());
    f.payload.resize(rng() % (net::kMaxPayload + 1));
    for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng());
    return f;
  };
  for (int round = 0; round < kFuzzRounds; ++round) {
    // Arbitrary noise, possibly containing start bytes and truncated frames,
    // then a valid frame: the decoder must find that frame.
    Bytes stream(rng() % 300);
    for (auto& b : stream) b = static_cast<std::uint8_t>(rng());
    if (rng() % 2) {
      auto partial = net::frame_encode(random_frame());
      partial.resize(rng() % partial.size());
      append(stream, partial);
    }
    const auto planted = random_frame();
    append(stream, net::frame_encode(planted));
    net::FrameDecoder dec;
    std::size_t at = 0;
    std::vector<net::Frame> got;
    while (at < stream.size()) {
      const auto n = std::min<std::size_t>(stream.size() - at, 1 + rng() % 40);
      dec.feed(ByteView(stream).subspan(at, n));
      at += n;
      while (auto f = dec.next()) got.push_back(*f);
    }
    // A false start near the end claims bytes that never come; end of stream settles it.
    dec.finish();
    while (auto f = dec.next()) got.push_back(*f);
    c.expect(!got.empty() && got.back() == planted, "round " + std::to_string(round) + " resynchronizes");
  }
  c.note(std::to_string(golden.size()) + " golden frames, " + std::to_string(kFuzzRounds) + " fuzz streams");
}

// Three tables, one of each kind of move.
void build_fault_scenario(gen::SyncRig& rig) {
  for (int i = 0; i < 5; ++i) rig.transponder(i, 1);
  rig.station(1, "dock");
  rig.station(2, "gate");
  for (int i = 1; i <= 6; ++i) rig.event(1, i);
  rig.sync({T::kTransponders, T::kStations, T::kEvents});
  rig.link->disconnect();
  rig.host->join();
  rig.central_now = 3000;
  rig.device_now = 3000;
  rig.transponder(7, 2);
  rig.transponder(8, 2);
  rig.device->upsert(T::kStations, store::Row{std::int64_t{9}, std::string("pda"), std::int64_t{0},
                                              std::string("mobile")});
  rig.event(2, 1);
  rig.device->remove(T::kEvents, store::Key{std::int64_t{1}, std::int64_t{1}});
}

struct Sides {
  sync::Digest central;
  std::uint64_t central_revision;
  sync::Digest device;
};

std::map<std::string, Sides> capture(gen::SyncRig& rig, const std::vector<std::string>& names) {
  std::map<std::string, Sides> out;
  for (const auto& name : names) {
    const auto cc = rig.central.table_copy(store::Actor::internal(), name);
    out[name] = {sync::content_digest(cc), cc.revision, sync::content_digest(*rig.device->table(name))};
  }
  return out;
}

void sync_criterion(Check& c) {
  const std::vector<std::string> three{T::kStations, T::kTransponders, T::kEvents};
  {
    gen::SyncRig rig;
    rig.station(1, "dock");
    rig.transponder(1, 1);
    rig.event(1, 1);
    rig.sync(three);
    const auto idle = rig.sync(three);
    const auto handshake = idle.bytes_sent + idle.bytes_received;

    rig.transponder(2, 1);
    const auto image = sync::to_compact(rig.central.table_copy(store::Actor::internal(), T::kTransponders)).bytes;
    const auto r = rig.sync(three);
    c.expect(r.complete && r.digest_verified, "session completes with a verified digest");
    c.expect(rig.outcome(r, T::kStations).body_bytes == 0, "stations body bytes 0");
    c.expect(rig.outcome(r, T::kEvents).body_bytes == 0, "events body bytes 0");
    c.expect(rig.outcome(r, T::kTransponders).body_bytes == image.size(), "transponders carry one image");
    const std::uint64_t push = 5 + 1 + std::string(T::kTransponders).size() + 4 + image.size() + 8;
    c.expect(r.bytes_sent + r.bytes_received == handshake + push, "transport bytes = handshake + one push");
    for (const auto& name : three) c.expect(rig.converged(name), name + " converged");

    const auto again = rig.sync(three);
    std::uint64_t body = 0;
    for (const auto& t : again.tables) body += t.body_bytes;
    c.expect(body == 0, "second session moves no table bytes");
    c.expect(again.bytes_sent + again.bytes_received == handshake, "second session is handshake only");
  }

  const std::vector<std::string> moved{T::kTransponders, T::kStations, T::kEvents};
  std::map<std::string, Sides> pre;
  std::map<std::string, Sides> post;
  std::uint64_t total = 0;
  {
    gen::SyncRig rig;
    build_fault_scenario(rig);
    pre = capture(rig, moved);
    const auto r = rig.sync(moved);
    c.expect(r.complete, "fault scenario completes without faults");
    total = rig.host->last_pipe()->bytes_transferred();
    post = capture(rig, moved);
  }
  std::mt19937_64 rng(7004);
  int atomic = 0;
  for (int run = 0; run < kFaultRuns; ++run) {
    gen::SyncRig rig;
    build_fault_scenario(rig);
    rig.host->cut_next_after(rng() % total);
    try {
      rig.sync(moved);
    } catch (const sync::Error&) {
    }
    rig.host->join();
    const auto now = capture(rig, moved);
    bool ok = true;
    for (const auto& name : moved) {
      const auto& n = now.at(name);
      const bool central = (n.central == pre[name].central && n.central_revision == pre[name].central_revision) ||
                           (n.central == post[name].central && n.central_revision == post[name].central_revision);
      const bool device = n.device == pre[name].device || n.device == post[name].device;
      ok = ok && central && device;
    }
    atomic += ok;
    c.expect(ok, "fault run " + std::to_string(run) + " left a table half-applied");
    rig.link->disconnect();
    const auto r = rig.sync(moved);
    bool converged = r.complete;
    for (const auto& name : moved) converged = converged && rig.converged(name);
    c.expect(converged, "fault run " + std::to_string(run) + " converges on retry");
  }
  c.note(std::to_string(atomic) + "/" + std::to_string(kFaultRuns) + " fault runs atomic");
}

void datastore_criterion(Check& c) {
  using namespace store;
  std::mt19937_64 rng(7005);
  std::uint64_t t = 0;
  Datastore live(TableSet::central(), [&t] { return ++t; });
  std::vector<Change> journal;
  live.set_change_sink([&](const Change& ch, const TableSet&) { journal.push_back(ch); });
  const auto& schemas = builtin_schemas();
  const auto admin = Actor::as(Role::Admin);
  int mutations = 0;
  while (mutations < kMutations) {
    const auto& schema = schemas[rng() % schemas.size()];
    if (rng() % 10 < 8) {
      live.upsert(admin, schema.name, gen::random_row(rng, schema));
    } else {
      const auto rows = live.rows(admin, schema.name);
      if (rows.empty()) continue;
      live.remove(admin, schema.name, schema.key_of(rows[rng() % rows.size()]));
    }
    ++mutations;
  }
  live.set_change_sink({});
  TableSet replayed = TableSet::central();
  for (const auto& ch : journal) {
    replayed.apply(change_from_json(nlohmann::json::parse(change_to_json(ch).dump()), replayed.table(ch.table).schema));
  }
  c.expect(journal.size() == static_cast<std::size_t>(kMutations), "every mutation journaled");
  c.expect(replayed.canonical() == live.snapshot().canonical(), "replay is byte-identical");

  // The on-disk form: write the store encrypted, flip bytes in the container.
  const std::string passphrase = "acceptance";
  SealingKey key(passphrase, KdfParams::minimal());
  const auto sealed = key.seal(as_bytes(live.snapshot().canonical()));
  std::set<std::size_t> positions;
  while (positions.size() < static_cast<std::size_t>(kTamperFlips)) positions.insert(rng() % sealed.size());
  int detected = 0;
  for (auto pos : positions) {
    auto bad = sealed;
    bad[pos] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    try {
      open_sealed(bad, passphrase);
    } catch (const Error& e) {
      detected += e.code() == Errc::IntegrityFailure || e.code() == Errc::WrongPassphrase ||
                  e.code() == Errc::UnsupportedVersion;
    }
  }
  c.expect(detected == kTamperFlips, std::to_string(detected) + "/" + std::to_string(kTamperFlips) + " flips detected");

  // Role x table x operation, stated independently of the implementation.
  int cells = 0;
  for (auto role : {Role::Viewer, Role::Operator, Role::Admin}) {
    for (const auto& schema : schemas) {
      for (auto access : {Access::Read, Access::Upsert, Access::Delete}) {
        bool want = false;
        if (schema.name == T::kUsers) {
          want = role == Role::Admin;
        } else {
          want = access == Access::Read || role != Role::Viewer;
        }
        Datastore db;
        const auto row = gen::random_row(rng, schema);
        db.upsert(Actor::internal(), schema.name, row);
        bool done = true;
        try {
          switch (access) {
            case Access::Read: db.rows(Actor::as(role), schema.name); break;
            case Access::Upsert: db.upsert(Actor::as(role), schema.name, row); break;
            case Access::Delete: db.remove(Actor::as(role), schema.name, schema.key_of(row)); break;
          }
        } catch (const Error& e) {
          done = e.code() != Errc::Unauthorized;
        }
        const std::string cell = std::string(to_string(role)) + "/" + schema.name + "/" + std::string(to_string(access));
        c.expect(allowed(role, schema.name, access) == want, cell + " policy");
        c.expect(done == want, cell + " enforcement");
        ++cells;
      }
    }
  }
  c.expect(cells == 3 * static_cast<int>(schemas.size()) * 3, "matrix size");
  c.note(std::to_string(kMutations) + " mutations, " + std::to_string(kTamperFlips) + " flips, " +
         std::to_string(cells) + " matrix cells");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

void end_to_end(Check& c) {
  const std::filesystem::path fixtures = RFIDTRACE_FIXTURE_DIR "/e2e";
  test::TempDir dir;
  std::filesystem::copy_file(fixtures / "world.json", dir.path() / "world.json");
  std::ofstream(dir.path() / "config.json") << R"({
    "store": "store", "kdf": "minimal", "world": "world.json",
    "stations": [{"addr": 3, "name": "dock", "password": "1234", "profile": "long"},
                 {"addr": 5, "name": "gate", "password": "0000", "profile": "long"}]})";
  const auto config = (dir.path() / "config.json").string();
  const auto report = (dir.path() / "alarms.csv").string();

  const std::vector<std::vector<std::string>> script{
      {"template", "define", (fixtures / "template.json").string()},
      {"alarm", "define", "pallets", "--trigger", "watchlist_seen", "--uid", "E004010000000001", "--station", "5"},
      {"tag", "write", "--station", "3", "--uid", "E004010000000001", "--template", "12", "--set", "lot=L-0042",
       "--set", "count=24", "--set", "weight_kg=512.5", "--set", "grade=B"},
      {"world", "move", "E004010000000001", "--reader", "5", "--position-cm", "6"},
      {"poll"},
      {"report", "define", "alarm-report", "--source", "events", "--filter", "kind = ALARM", "--columns",
       "station,seq,kind,uid,detail"},
      {"report", "render", "alarm-report", "-o", report},
  };
  for (auto args : script) {
    std::string line;
    for (const auto& a : args) line += a + " ";
    args.insert(args.begin(), {"--config", config});
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    c.expect(code == 0, "`" + line + "` exited " + std::to_string(code) + ": " + err.str());
  }
  c.expect(slurp(report) == slurp(fixtures / "alarm_report.csv"), "report rows match the expected fixture");

  // The tag now answers at station 5 with what was written at station 3.
  std::ostringstream out, err;
  cli::run({"--config", config, "--json", "tag", "read", "--station", "5", "--uid", "E004010000000001"}, out, err);
  const auto values = nlohmann::json::parse(out.str()).at("values");
  c.expect(values == nlohmann::json{{"lot", "L-0042"}, {"count", 24}, {"weight_kg", 512.5}, {"grade", "B"}},
           "tag memory decodes to the written values");
  c.note(std::to_string(script.size()) + " commands");
}

}  // namespace

int main() {
  criterion("codec roundtrip and corruption", kCodecBudgetS, codec_roundtrip);
  criterion("anti-collision oracle equivalence", kAntiCollisionBudgetS, anti_collision);
  criterion("throughput calibration", 0, throughput);
  criterion("station limits", 0, station_limits);
  criterion("frame protocol", 0, frame_protocol);
  criterion("sync transfers only modified tables", 0, sync_criterion);
  criterion("datastore replay, tamper detection, authorization", 0, datastore_criterion);
  criterion("end-to-end CLI alarm report", kEndToEndBudgetS, end_to_end);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures;
}
