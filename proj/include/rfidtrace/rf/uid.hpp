#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace rfidtrace::rf {

/// Transponder family byte carried in uid[0].
inline constexpr std::uint8_t kUidFamilyByte = 0xE0;

/// 8-byte tag identifier. bytes[0] is the most significant byte (the family
/// byte 0xE0); the anti-collision mask is applied from the least significant
/// end, i.e. starting at bytes[7].
struct Uid {
  std::array<std::uint8_t, 8> bytes{};

  static Uid from_value(std::uint64_t value) noexcept;
  /// 16 hex digits, case-insensitive. Throws std::invalid_argument.
  static Uid parse(std::string_view hex);

  std::uint64_t value() const noexcept;
  std::string hex() const;
  bool valid_family() const noexcept { return bytes[0] == kUidFamilyByte; }

  friend auto operator<=>(const Uid&, const Uid&) = default;
};

}  // namespace rfidtrace::rf
