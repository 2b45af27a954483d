#include "rfidtrace/codec/codec.hpp"

#include <algorithm>

#include "rfidtrace/codec/registry.hpp"
#include "rfidtrace/common/crc16.hpp"

namespace rfidtrace::codec {
namespace {

void encode_value(Bytes& out, const FieldDef& field, const FieldValue& value) {
  if (kind_of(value) != field.type.kind()) {
    throw Error(Errc::TypeMismatch, "field '" + field.name + "' expects " +
                                        std::string(to_string(field.type.kind())) + ", got " +
                                        std::string(to_string(kind_of(value))));
  }
  switch (field.type.kind()) {
    case FieldKind::Character:
      out.push_back(std::get<Character>(value).value);
      break;
    case FieldKind::String: {
      const auto& text = std::get<std::string>(value);
      if (text.size() > field.type.max_len()) {
        throw Error(Errc::Overflow, "field '" + field.name + "' holds at most " +
                                        std::to_string(field.type.max_len()) + " bytes");
      }
      put_le(out, static_cast<std::uint16_t>(text.size()));
      append(out, as_bytes(text));
      out.insert(out.end(), field.type.max_len() - text.size(), 0);
      break;
    }
    case FieldKind::Integer:
      put_le(out, std::get<std::int32_t>(value));
      break;
    case FieldKind::Real:
      put_f64(out, std::get<double>(value));
      break;
  }
}

FieldValue decode_value(ByteView body, std::size_t& offset, const FieldDef& field) {
  switch (field.type.kind()) {
    case FieldKind::Character:
      return Character{body[offset++]};
    case FieldKind::String: {
      const auto max_len = field.type.max_len();
      const auto used = get_le<std::uint16_t>(body, offset);
      offset += 2;
      if (used > max_len) {
        throw Error(Errc::MalformedBody, "string length exceeds field capacity");
      }
      std::string text(reinterpret_cast<const char*>(body.data() + offset), used);
      const auto pad = body.subspan(offset + used, max_len - used);
      if (std::any_of(pad.begin(), pad.end(), [](auto b) { return b != 0; })) {
        throw Error(Errc::MalformedBody, "non-zero string padding");
      }
      offset += max_len;
      return text;
    }
    case FieldKind::Integer: {
      auto v = get_le<std::int32_t>(body, offset);
      offset += 4;
      return v;
    }
    case FieldKind::Real: {
      auto v = get_f64(body, offset);
      offset += 8;
      return v;
    }
  }
  throw Error(Errc::MalformedBody, "unknown field kind");
}

}  // namespace

std::size_t encoded_size(const Template& tmpl) noexcept {
  std::size_t size = kHeaderSize + kTrailerSize;
  for (const auto& field : tmpl.fields) size += field.type.encoded_width();
  return size;
}

Bytes encode(const Template& tmpl, const TagPayload& payload, std::size_t capacity) {
  const auto total = encoded_size(tmpl);
  if (total > capacity) {
    throw Error(Errc::CapacityExceeded, std::to_string(total) + " > " + std::to_string(capacity));
  }
  if (payload.template_id != tmpl.template_id || payload.version != tmpl.version) {
    throw Error(Errc::TypeMismatch, "payload belongs to a different template");
  }
  if (payload.values.size() != tmpl.fields.size()) {
    throw Error(Errc::TypeMismatch, "expected " + std::to_string(tmpl.fields.size()) +
                                        " values, got " + std::to_string(payload.values.size()));
  }

  Bytes out;
  out.reserve(total);
  out.push_back(kPayloadMagic);
  put_le(out, tmpl.template_id);
  out.push_back(tmpl.version);
  put_le(out, static_cast<std::uint16_t>(total - kHeaderSize - kTrailerSize));
  for (std::size_t i = 0; i < tmpl.fields.size(); ++i) {
    encode_value(out, tmpl.fields[i], payload.values[i]);
  }
  put_le(out, crc16_ccitt_false(out));
  return out;
}

std::size_t announced_length(ByteView header) {
  if (header.empty()) throw Error(Errc::TruncatedPayload, "empty input");
  if (header[0] != kPayloadMagic) throw Error(Errc::BadMagic);
  if (header.size() < kHeaderSize) throw Error(Errc::TruncatedPayload, "short header");
  return kHeaderSize + get_le<std::uint16_t>(header, 4) + kTrailerSize;
}

TagPayload decode(ByteView bytes, const TemplateRegistry& registry) {
  const auto total = announced_length(bytes);
  if (bytes.size() < total) {
    throw Error(Errc::TruncatedPayload,
                "need " + std::to_string(total) + " bytes, have " + std::to_string(bytes.size()));
  }
  if (bytes.size() > total) throw Error(Errc::MalformedBody, "trailing bytes after payload");

  const auto covered = bytes.first(total - kTrailerSize);
  if (crc16_ccitt_false(covered) != get_le<std::uint16_t>(bytes, total - kTrailerSize)) {
    throw Error(Errc::CrcMismatch);
  }

  TagPayload payload;
  payload.template_id = get_le<std::uint16_t>(bytes, 1);
  payload.version = bytes[3];
  const Template* tmpl = registry.find(payload.template_id, payload.version);
  if (tmpl == nullptr) {
    throw Error(Errc::UnknownTemplate, "id " + std::to_string(payload.template_id) + " version " +
                                           std::to_string(payload.version));
  }
  const auto body = bytes.subspan(kHeaderSize, total - kHeaderSize - kTrailerSize);
  if (kHeaderSize + body.size() + kTrailerSize != encoded_size(*tmpl)) {
    throw Error(Errc::MalformedBody, "body length does not match template");
  }

  std::size_t offset = 0;
  payload.values.reserve(tmpl->fields.size());
  for (const auto& field : tmpl->fields) {
    payload.values.push_back(decode_value(body, offset, field));
  }
  return payload;
}

std::vector<Bytes> blocks_for(ByteView bytes, std::size_t block_size, std::size_t max_blocks) {
  if (block_size == 0) throw std::invalid_argument("block_size must be >= 1");
  const auto count = (bytes.size() + block_size - 1) / block_size;
  if (count > max_blocks) {
    throw Error(Errc::CapacityExceeded, std::to_string(count) + " blocks needed, tag has " +
                                            std::to_string(max_blocks));
  }
  std::vector<Bytes> blocks;
  blocks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto begin = i * block_size;
    const auto n = std::min(block_size, bytes.size() - begin);
    Bytes block(bytes.begin() + static_cast<std::ptrdiff_t>(begin),
                bytes.begin() + static_cast<std::ptrdiff_t>(begin + n));
    block.resize(block_size, 0);
    blocks.push_back(std::move(block));
  }
  return blocks;
}

Bytes join_blocks(const std::vector<Bytes>& blocks) {
  Bytes joined;
  for (const auto& block : blocks) append(joined, block);
  if (joined.empty()) return joined;
  const auto total = announced_length(joined);
  if (joined.size() < total) throw Error(Errc::TruncatedPayload, "blocks shorter than payload");
  joined.resize(total);
  return joined;
}

}  // namespace rfidtrace::codec
