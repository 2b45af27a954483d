#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "rfidtrace/codec/field.hpp"

namespace rfidtrace::codec {

/// Registered templates keyed by (template_id, version). A registered version
/// is immutable; re-registering the same key fails with DuplicateTemplate.
class TemplateRegistry {
 public:
  void add(Template tmpl, std::size_t capacity = kDefaultTagCapacity);
  bool remove(std::uint16_t template_id, std::uint8_t version);
  const Template* find(std::uint16_t template_id, std::uint8_t version) const;
  std::vector<Template> list() const;
  std::size_t size() const noexcept { return templates_.size(); }

 private:
  std::map<std::pair<std::uint16_t, std::uint8_t>, Template> templates_;
};

}  // namespace rfidtrace::codec
