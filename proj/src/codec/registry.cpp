#include "rfidtrace/codec/registry.hpp"

namespace rfidtrace::codec {

void TemplateRegistry::add(Template tmpl, std::size_t capacity) {
  validate(tmpl, capacity);
  auto key = std::make_pair(tmpl.template_id, tmpl.version);
  if (templates_.contains(key)) {
    throw Error(Errc::DuplicateTemplate, "template " + std::to_string(key.first) + " version " +
                                             std::to_string(key.second) + " already registered");
  }
  templates_.emplace(key, std::move(tmpl));
}

bool TemplateRegistry::remove(std::uint16_t template_id, std::uint8_t version) {
  return templates_.erase({template_id, version}) > 0;
}

const Template* TemplateRegistry::find(std::uint16_t template_id, std::uint8_t version) const {
  auto it = templates_.find({template_id, version});
  return it == templates_.end() ? nullptr : &it->second;
}

std::vector<Template> TemplateRegistry::list() const {
  std::vector<Template> out;
  out.reserve(templates_.size());
  for (const auto& [key, tmpl] : templates_) out.push_back(tmpl);
  return out;
}

}  // namespace rfidtrace::codec
