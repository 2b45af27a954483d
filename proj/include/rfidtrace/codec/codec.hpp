#pragma once

#include <cstddef>
#include <vector>

#include "rfidtrace/codec/field.hpp"
#include "rfidtrace/common/bytes.hpp"

namespace rfidtrace::codec {

class TemplateRegistry;

/// header(6) + sum of field widths + trailer(2). Independent of the values.
std::size_t encoded_size(const Template& tmpl) noexcept;

/// Tag payload layout, little-endian throughout:
///
///   [0x54][template_id:2][version:1][body_length:2] body... [crc16:2]
///
/// Body fields follow declaration order. Character is 1 byte, integer is
/// 4 bytes two's complement, real is binary64, string is a 2-byte used
/// length followed by max_len bytes (content then zero padding). The CRC is
/// CRC-16/CCITT-FALSE over header and body.
Bytes encode(const Template& tmpl, const TagPayload& payload,
             std::size_t capacity = kDefaultTagCapacity);

/// Decodes exactly one payload; trailing bytes are rejected as MalformedBody.
TagPayload decode(ByteView bytes, const TemplateRegistry& registry);

/// Splits into ceil(len / block_size) blocks, zero-padding the last one.
std::vector<Bytes> blocks_for(ByteView bytes, std::size_t block_size,
                              std::size_t max_blocks = kDefaultTagCapacity);

/// Inverse of blocks_for for an encoded payload: concatenates the blocks and
/// trims to the length announced by the header. An empty block list yields an
/// empty byte string.
Bytes join_blocks(const std::vector<Bytes>& blocks);

/// Total payload length (header + body + trailer) announced by a header, or
/// throws BadMagic / TruncatedPayload.
std::size_t announced_length(ByteView header);

}  // namespace rfidtrace::codec
