#pragma once

#include <cstdint>

#include "rfidtrace/common/bytes.hpp"

namespace rfidtrace {

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
/// Check value for "123456789" is 0x29B1.
std::uint16_t crc16_ccitt_false(ByteView data, std::uint16_t crc = 0xFFFF) noexcept;

}  // namespace rfidtrace
