#include <doctest.h>

#include <chrono>
#include <fstream>
#include <random>

#include "rfidtrace/store/credentials.hpp"
#include "rfidtrace/store/persistence.hpp"
#include "rfidtrace/store/sealed_container.hpp"
#include "support/temp_dir.hpp"

using namespace rfidtrace;
using namespace rfidtrace::store;

namespace {

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a store error");
  return Errc::Io;
}

}  // namespace

TEST_CASE("authenticate") {
  Datastore store;
  store.upsert(Actor::internal(), tables::kUsers, make_user_row("ana", Role::Operator, "s3cret"));
  store.upsert(Actor::internal(), tables::kUsers, make_user_row("bo", Role::Viewer, "pw", false));

  const auto id = authenticate(store, "ana", "s3cret");
  CHECK(id.username == "ana");
  CHECK(id.role == Role::Operator);
  CHECK(error_of([&] { authenticate(store, "ana", "wrong"); }) == Errc::BadCredentials);
  CHECK(error_of([&] { authenticate(store, "nobody", "s3cret"); }) == Errc::BadCredentials);
  CHECK(error_of([&] { authenticate(store, "bo", "pw"); }) == Errc::Disabled);
  // A disabled account with a wrong password does not reveal that it exists.
  CHECK(error_of([&] { authenticate(store, "bo", "nope"); }) == Errc::BadCredentials);
}

TEST_CASE("password hashes are salted") {
  const auto a = hash_password("same");
  const auto b = hash_password("same");
  CHECK(a != b);
  CHECK(verify_password(a, "same"));
  CHECK(verify_password(b, "same"));
  CHECK_FALSE(verify_password(a, "Same"));
  CHECK_FALSE(verify_password("garbage", "same"));
  CHECK(a.rfind("$argon2id$", 0) == 0);
}

TEST_CASE("sealed container roundtrip and header") {
  const std::string text = "central store payload";
  const auto sealed = seal(as_bytes(text), "pass", KdfParams::minimal());
  CHECK(sealed.size() == kContainerHeaderSize + text.size() + 16);
  CHECK(std::string(sealed.begin(), sealed.begin() + 4) == "RFTS");
  CHECK(sealed[4] == 1);
  CHECK(to_string(open_sealed(sealed, "pass")) == text);
  CHECK(error_of([&] { open_sealed(sealed, "Pass"); }) == Errc::WrongPassphrase);

  auto future = sealed;
  future[4] = 2;
  CHECK(error_of([&] { open_sealed(future, "pass"); }) == Errc::UnsupportedVersion);
  CHECK(error_of([&] { open_sealed(Bytes(sealed.begin(), sealed.begin() + 60), "pass"); }) ==
        Errc::IntegrityFailure);
}

TEST_CASE("every ciphertext byte flip is an integrity failure") {
  const std::string text(300, 'x');
  SealingKey key("pass", KdfParams::minimal());
  const auto sealed = key.seal(as_bytes(text));
  for (std::size_t i = kContainerHeaderSize; i < sealed.size(); ++i) {
    auto bad = sealed;
    bad[i] ^= 0x01;
    REQUIRE(error_of([&] { key.open(bad); }) == Errc::IntegrityFailure);
  }
}

TEST_CASE("header byte flips are all detected") {
  const auto sealed = seal(as_bytes(std::string("abc")), "pass", KdfParams::minimal());
  for (std::size_t i = 0; i < kContainerHeaderSize; ++i) {
    auto bad = sealed;
    bad[i] ^= 0x80;
    CAPTURE(i);
    bool rejected = false;
    try {
      open_sealed(bad, "pass");
    } catch (const Error& e) {
      rejected = e.code() == Errc::IntegrityFailure || e.code() == Errc::WrongPassphrase ||
                 e.code() == Errc::UnsupportedVersion;
    }
    CHECK(rejected);
  }
}

TEST_CASE("encrypted store directory") {
  test::TempDir dir;
  StoreOptions opts{std::string("correct horse"), KdfParams::minimal(), false};
  std::string expected;
  {
    StoreDirectory sd(dir.path(), opts);
    CHECK(sd.encrypted());
    sd.store().upsert(Actor::internal(), tables::kStations,
                      Row{std::int64_t{3}, std::string("dock"), std::int64_t{2}, std::string("ok")});
    sd.store().upsert(Actor::internal(), tables::kStations,
                      Row{std::int64_t{4}, std::string("gate"), std::int64_t{0}, std::string("ok")});
    expected = sd.store().snapshot().canonical();
  }
  CHECK_FALSE(std::filesystem::exists(dir.path() / "journal.jsonl"));
  {
    StoreDirectory sd(dir.path(), opts);
    CHECK(sd.store().snapshot().canonical() == expected);
    CHECK(sd.store().revision(tables::kStations) == 2);
  }
  StoreOptions wrong = opts;
  wrong.passphrase = "battery staple";
  CHECK(error_of([&] { StoreDirectory sd(dir.path(), wrong); }) == Errc::WrongPassphrase);
  CHECK(error_of([&] { StoreDirectory sd(dir.path(), StoreOptions{}); }) == Errc::WrongPassphrase);
  CHECK(load_store(dir.path(), opts).canonical() == expected);

  // The file does not contain the plaintext.
  std::ifstream in(dir.path() / "store.enc", std::ios::binary);
  std::string raw((std::istreambuf_iterator<char>(in)), {});
  CHECK(raw.find("dock") == std::string::npos);
}
