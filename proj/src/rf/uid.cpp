#include "rfidtrace/rf/uid.hpp"

#include <stdexcept>

#include "rfidtrace/common/hex.hpp"

namespace rfidtrace::rf {

Uid Uid::from_value(std::uint64_t value) noexcept {
  Uid uid;
  for (int i = 7; i >= 0; --i) {
    uid.bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(value);
    value >>= 8;
  }
  return uid;
}

Uid Uid::parse(std::string_view hex) {
  auto raw = from_hex(hex);
  if (raw.size() != 8) throw std::invalid_argument("uid must be 8 bytes (16 hex digits)");
  Uid uid;
  std::copy(raw.begin(), raw.end(), uid.bytes.begin());
  return uid;
}

std::uint64_t Uid::value() const noexcept {
  std::uint64_t v = 0;
  for (auto b : bytes) v = (v << 8) | b;
  return v;
}

std::string Uid::hex() const { return to_hex(bytes); }

}  // namespace rfidtrace::rf
