#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "glow/geometry.hpp"

namespace glow {

// Dense index into a LabelSpace.
struct CategoryId {
  std::int32_t value = -1;

  friend auto operator<=>(const CategoryId&, const CategoryId&) = default;
};

/// Ordered set of category names with stable integer indices. Optionally
/// remembers the external (e.g. COCO) id each category was declared with.
class LabelSpace {
 public:
  LabelSpace() = default;
  explicit LabelSpace(std::vector<std::string> names);

  // Throws ValidationError on a duplicate name or external id.
  CategoryId add(std::string name, std::optional<std::int64_t> external_id = std::nullopt);

  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }

  const std::string& name(CategoryId id) const;
  std::optional<CategoryId> find(std::string_view name) const;
  std::optional<CategoryId> find_external(std::int64_t external_id) const;
  // Throws ValidationError if the name is unknown.
  CategoryId at(std::string_view name) const;

  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<std::int64_t> external_id(CategoryId id) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::optional<std::int64_t>> external_ids_;
  std::unordered_map<std::string, std::int32_t> by_name_;
  std::unordered_map<std::int64_t, std::int32_t> by_external_;
};

// A box with its category; `confidence` is set iff the box is a detector output.
struct LabeledBox {
  BoundingBox box;
  CategoryId category;
  std::optional<double> confidence;
};

struct SceneLayout {
  std::string id;
  double width = 1.0;
  double height = 1.0;
  std::vector<LabeledBox> objects;

  std::size_t count(CategoryId c) const noexcept;
  bool contains(CategoryId c) const noexcept { return count(c) > 0; }
};

}  // namespace glow
