#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rfidtrace {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view text) {
  return {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()};
}

inline std::string to_string(ByteView bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

// Little-endian helpers. All wire formats in this project are little-endian.

template <typename T>
void put_le(Bytes& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto bits = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
}

template <typename T>
T get_le(ByteView in, std::size_t offset) {
  using U = std::make_unsigned_t<T>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<U>(static_cast<U>(in[offset + i]) << (8 * i));
  }
  return static_cast<T>(bits);
}

inline void put_f64(Bytes& out, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, sizeof bits);
  put_le(out, bits);
}

inline double get_f64(ByteView in, std::size_t offset) {
  auto bits = get_le<std::uint64_t>(in, offset);
  double value;
  std::memcpy(&value, &bits, sizeof value);
  return value;
}

inline void put_f32(Bytes& out, float value) {
  std::uint32_t bits;
  std::memcpy(&bits, &value, sizeof bits);
  put_le(out, bits);
}

inline float get_f32(ByteView in, std::size_t offset) {
  auto bits = get_le<std::uint32_t>(in, offset);
  float value;
  std::memcpy(&value, &bits, sizeof value);
  return value;
}

inline void append(Bytes& out, ByteView more) { out.insert(out.end(), more.begin(), more.end()); }

}  // namespace rfidtrace
