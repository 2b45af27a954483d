#pragma once

// Bit-serial CRC-16/CCITT-FALSE, kept separate from the table-driven
// implementation under test. Mirrors tests/oracles/crc16_oracle.py.

#include <cstdint>
#include <span>

namespace oracle {

inline std::uint16_t crc16_bitwise(std::span<const std::uint8_t> data) {
  std::uint16_t crc = 0xFFFF;
  for (auto byte : data) {
    for (int i = 7; i >= 0; --i) {
      const bool bit = (byte >> i) & 1;
      const bool top = (crc >> 15) & 1;
      crc = static_cast<std::uint16_t>(crc << 1);
      if (top != bit) crc ^= 0x1021;
    }
  }
  return crc;
}

}  // namespace oracle
