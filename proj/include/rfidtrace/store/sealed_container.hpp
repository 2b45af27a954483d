#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "rfidtrace/common/bytes.hpp"
#include "rfidtrace/store/value.hpp"

namespace rfidtrace::store {

// Encrypted container layout (little-endian):
//
//   offset size  field
//   0      4     magic "RFTS"
//   4      1     format version (1)
//   5      1     algorithm id (1 = Argon2id13 + XChaCha20-Poly1305-IETF)
//   6      4     KDF opslimit
//   10     4     KDF memlimit in KiB
//   14     16    salt
//   30     24    nonce
//   54     16    key check: BLAKE2b-128 keyed by the derived key over bytes 0..53
//   70     ...   ciphertext + 16-byte tag, header bytes 0..69 as associated data

inline constexpr std::size_t kContainerHeaderSize = 70;
inline constexpr std::uint8_t kContainerVersion = 1;

struct KdfParams {
  std::uint32_t opslimit = 0;
  std::uint32_t memlimit_kib = 0;
  /// libsodium's interactive limits.
  static KdfParams interactive();
  /// Cheapest allowed setting; for tests.
  static KdfParams minimal();
  friend bool operator==(const KdfParams&, const KdfParams&) = default;
};

/// Derives and keeps one key so repeated saves skip the KDF. Not thread-safe.
class SealingKey {
 public:
  SealingKey(std::string passphrase, KdfParams params);
  SealingKey(const SealingKey&) = delete;
  SealingKey& operator=(const SealingKey&) = delete;
  ~SealingKey();

  Bytes seal(ByteView plaintext);
  /// Throws WrongPassphrase (key check fails), IntegrityFailure (tampered),
  /// or UnsupportedVersion. Adopts the container's salt and parameters so a
  /// following seal() reuses the derived key.
  Bytes open(ByteView container);

  const KdfParams& params() const noexcept { return params_; }

 private:
  void derive(const std::array<std::uint8_t, 16>& salt, KdfParams params);

  std::string passphrase_;
  KdfParams params_;
  bool have_key_ = false;
  std::array<std::uint8_t, 16> salt_{};
  std::array<std::uint8_t, 32> key_{};
};

Bytes seal(ByteView plaintext, const std::string& passphrase, KdfParams params = KdfParams::interactive());
Bytes open_sealed(ByteView container, const std::string& passphrase);

}  // namespace rfidtrace::store
