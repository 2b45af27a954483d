#pragma once

#include <string>
#include <string_view>

#include "rfidtrace/common/bytes.hpp"

namespace rfidtrace {

/// Uppercase hex, no separators.
std::string to_hex(ByteView bytes);

/// Uppercase hex pairs separated by single spaces ("AA 05 01").
std::string to_spaced_hex(ByteView bytes);

/// Accepts upper/lower case; spaces are ignored. Throws std::invalid_argument
/// on odd length or non-hex characters.
Bytes from_hex(std::string_view text);

}  // namespace rfidtrace
