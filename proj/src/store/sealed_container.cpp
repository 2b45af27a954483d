#include "rfidtrace/store/sealed_container.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace rfidtrace::store {

namespace {

constexpr std::uint8_t kMagic[4] = {'R', 'F', 'T', 'S'};
constexpr std::uint8_t kAlgorithm = 1;
constexpr std::size_t kKeyCheckOffset = 54;
constexpr std::size_t kNonceOffset = 30;
constexpr std::size_t kSaltOffset = 14;
constexpr std::uint32_t kMaxOpslimit = 16;
constexpr std::uint32_t kMaxMemlimitKiB = 1024 * 1024;

void ensure_sodium() {
  static const bool ready = sodium_init() >= 0;
  if (!ready) throw std::runtime_error("libsodium initialization failed");
}

bool params_in_bounds(const KdfParams& p) {
  return p.opslimit >= crypto_pwhash_OPSLIMIT_MIN && p.opslimit <= kMaxOpslimit &&
         std::uint64_t{p.memlimit_kib} * 1024 >= crypto_pwhash_MEMLIMIT_MIN &&
         p.memlimit_kib <= kMaxMemlimitKiB;
}

}  // namespace

KdfParams KdfParams::interactive() {
  return {static_cast<std::uint32_t>(crypto_pwhash_OPSLIMIT_INTERACTIVE),
          static_cast<std::uint32_t>(crypto_pwhash_MEMLIMIT_INTERACTIVE / 1024)};
}

KdfParams KdfParams::minimal() {
  return {static_cast<std::uint32_t>(crypto_pwhash_OPSLIMIT_MIN),
          static_cast<std::uint32_t>(crypto_pwhash_MEMLIMIT_MIN / 1024)};
}

SealingKey::SealingKey(std::string passphrase, KdfParams params)
    : passphrase_(std::move(passphrase)), params_(params) {
  ensure_sodium();
  if (!params_in_bounds(params_)) throw std::invalid_argument("KDF parameters out of bounds");
}

SealingKey::~SealingKey() {
  sodium_memzero(key_.data(), key_.size());
  sodium_memzero(passphrase_.data(), passphrase_.size());
}

void SealingKey::derive(const std::array<std::uint8_t, 16>& salt, KdfParams params) {
  if (have_key_ && salt == salt_ && params == params_) return;
  if (crypto_pwhash(key_.data(), key_.size(), passphrase_.data(), passphrase_.size(), salt.data(),
                    params.opslimit, std::size_t{params.memlimit_kib} * 1024,
                    crypto_pwhash_ALG_ARGON2ID13) != 0) {
    throw std::runtime_error("key derivation ran out of memory");
  }
  salt_ = salt;
  params_ = params;
  have_key_ = true;
}

Bytes SealingKey::seal(ByteView plaintext) {
  if (!have_key_) {
    std::array<std::uint8_t, 16> salt;
    randombytes_buf(salt.data(), salt.size());
    derive(salt, params_);
  }
  Bytes out(kMagic, kMagic + 4);
  out.push_back(kContainerVersion);
  out.push_back(kAlgorithm);
  put_le(out, params_.opslimit);
  put_le(out, params_.memlimit_kib);
  out.insert(out.end(), salt_.begin(), salt_.end());
  std::uint8_t nonce[crypto_aead_xchacha20poly1305_ietf_NPUBBYTES];
  randombytes_buf(nonce, sizeof nonce);
  out.insert(out.end(), nonce, nonce + sizeof nonce);
  std::uint8_t check[16];
  crypto_generichash(check, sizeof check, out.data(), out.size(), key_.data(), key_.size());
  out.insert(out.end(), check, check + sizeof check);

  const auto header = out.size();
  out.resize(header + plaintext.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
  unsigned long long written = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(out.data() + header, &written, plaintext.data(),
                                             plaintext.size(), out.data(), header, nullptr, nonce,
                                             key_.data());
  out.resize(header + written);
  return out;
}

Bytes SealingKey::open(ByteView c) {
  if (c.size() < 6 || std::memcmp(c.data(), kMagic, 4) != 0) {
    throw Error(Errc::IntegrityFailure, "not an encrypted store container");
  }
  if (c[4] != kContainerVersion) {
    throw Error(Errc::UnsupportedVersion, "container version " + std::to_string(c[4]));
  }
  if (c[5] != kAlgorithm) throw Error(Errc::UnsupportedVersion, "algorithm " + std::to_string(c[5]));
  if (c.size() < kContainerHeaderSize + crypto_aead_xchacha20poly1305_ietf_ABYTES) {
    throw Error(Errc::IntegrityFailure, "container truncated");
  }
  const KdfParams params{get_le<std::uint32_t>(c, 6), get_le<std::uint32_t>(c, 10)};
  if (!params_in_bounds(params)) throw Error(Errc::IntegrityFailure, "KDF parameters out of bounds");
  std::array<std::uint8_t, 16> salt;
  std::memcpy(salt.data(), c.data() + kSaltOffset, salt.size());
  derive(salt, params);

  std::uint8_t check[16];
  crypto_generichash(check, sizeof check, c.data(), kKeyCheckOffset, key_.data(), key_.size());
  if (sodium_memcmp(check, c.data() + kKeyCheckOffset, sizeof check) != 0) {
    throw Error(Errc::WrongPassphrase);
  }
  Bytes plain(c.size() - kContainerHeaderSize - crypto_aead_xchacha20poly1305_ietf_ABYTES);
  unsigned long long n = 0;
  if (crypto_aead_xchacha20poly1305_ietf_decrypt(plain.data(), &n, nullptr, c.data() + kContainerHeaderSize,
                                                 c.size() - kContainerHeaderSize, c.data(),
                                                 kContainerHeaderSize, c.data() + kNonceOffset,
                                                 key_.data()) != 0) {
    sodium_memzero(plain.data(), plain.size());
    throw Error(Errc::IntegrityFailure, "authentication tag mismatch");
  }
  plain.resize(n);
  return plain;
}

Bytes seal(ByteView plaintext, const std::string& passphrase, KdfParams params) {
  SealingKey key(passphrase, params);
  return key.seal(plaintext);
}

Bytes open_sealed(ByteView container, const std::string& passphrase) {
  SealingKey key(passphrase, KdfParams::minimal());
  return key.open(container);
}

}  // namespace rfidtrace::store
