#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glow/location_model.hpp"
#include "glow/scene.hpp"
#include "glow/wordspace.hpp"

namespace glow {

enum class RequestKind { R1, R2, R3 };

std::string to_string(RequestKind kind);
RequestKind request_kind_from_string(const std::string& text);

/// R1: relabel one given (or auto-selected) object as `target`.
/// R2: make `target` appear somewhere.
/// R3: make exactly `count` instances of `target` appear.
struct AttackRequest {
  std::string scene_id;
  RequestKind kind = RequestKind::R2;
  std::optional<CategoryId> target;
  std::optional<Percentile> percentile;
  std::size_t count = 1;
  std::optional<std::size_t> victim_index;  // R1 only

  // Throws ValidationError on R3 with count < 2 or a victim index on R2/R3.
  void validate() const;
};

struct Victim {
  std::size_t object;  // index into the scene's predictions
  BoundingBox box;
  CategoryId target;
};

struct VictimSet {
  std::vector<Victim> victims;
  // R1 only: no prediction cleared the confidence gate.
  bool r1_fallback = false;

  std::size_t size() const noexcept { return victims.size(); }
  bool is_victim(std::size_t object) const noexcept;
};

inline constexpr double kR1ConfidenceGate = 0.85;

struct R1Selection {
  std::size_t index;
  bool fallback;
};

// Largest-area prediction with confidence >= 0.85; otherwise the most
// confident prediction with `fallback` set. Ties go to the lower index.
R1Selection select_victim_r1(const SceneLayout& predictions);

// Index of the prediction maximizing the weighted density of `target`'s model.
// Boxes already labeled `target` are not candidates. Ties go to the lower index.
std::size_t localize_r2(const SceneLayout& predictions, CategoryId target, const CategoryGMM& model);

// The `count` candidates with the highest density, density-descending.
std::vector<std::size_t> localize_r3(const SceneLayout& predictions, CategoryId target, std::size_t count,
                                     const CategoryGMM& model);

// Uniformly chosen distinct victims among the non-`target` boxes; used by the
// baseline generators under R2/R3.
std::vector<std::size_t> select_random_victims(const SceneLayout& predictions, CategoryId target,
                                               std::size_t count, std::uint64_t seed);

// Requires `request.target` to be resolved.
VictimSet build_victim_set(const AttackRequest& request, const SceneLayout& predictions, const ModelSet& models,
                           const LabelSpace& labels);

VictimSet victims_from_indices(const SceneLayout& predictions, const std::vector<std::size_t>& indices,
                               CategoryId target);

}  // namespace glow
