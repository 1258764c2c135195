#include "glow/scene.hpp"

#include <algorithm>

#include "glow/error.hpp"

namespace glow {

LabelSpace::LabelSpace(std::vector<std::string> names) {
  for (auto& n : names) add(std::move(n));
}

CategoryId LabelSpace::add(std::string name, std::optional<std::int64_t> external_id) {
  if (by_name_.contains(name)) throw ValidationError("duplicate category name '" + name + "'");
  if (external_id && by_external_.contains(*external_id)) {
    throw ValidationError("duplicate category id " + std::to_string(*external_id));
  }
  const auto index = static_cast<std::int32_t>(names_.size());
  by_name_.emplace(name, index);
  if (external_id) by_external_.emplace(*external_id, index);
  names_.push_back(std::move(name));
  external_ids_.push_back(external_id);
  return CategoryId{index};
}

const std::string& LabelSpace::name(CategoryId id) const {
  if (id.value < 0 || static_cast<std::size_t>(id.value) >= names_.size()) {
    throw ValidationError("category index " + std::to_string(id.value) + " outside label space");
  }
  return names_[static_cast<std::size_t>(id.value)];
}

std::optional<CategoryId> LabelSpace::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return CategoryId{it->second};
}

std::optional<CategoryId> LabelSpace::find_external(std::int64_t external_id) const {
  auto it = by_external_.find(external_id);
  if (it == by_external_.end()) return std::nullopt;
  return CategoryId{it->second};
}

CategoryId LabelSpace::at(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw ValidationError("unknown category '" + std::string(name) + "'");
}

std::optional<std::int64_t> LabelSpace::external_id(CategoryId id) const {
  name(id);  // bounds check
  return external_ids_[static_cast<std::size_t>(id.value)];
}

std::size_t SceneLayout::count(CategoryId c) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(objects.begin(), objects.end(), [c](const LabeledBox& o) { return o.category == c; }));
}

}  // namespace glow
