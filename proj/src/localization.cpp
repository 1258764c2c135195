#include "glow/localization.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "glow/error.hpp"

namespace glow {

std::string to_string(RequestKind kind) {
  switch (kind) {
    case RequestKind::R1: return "r1";
    case RequestKind::R2: return "r2";
    case RequestKind::R3: return "r3";
  }
  return "?";
}

RequestKind request_kind_from_string(const std::string& text) {
  if (text == "r1" || text == "R1") return RequestKind::R1;
  if (text == "r2" || text == "R2") return RequestKind::R2;
  if (text == "r3" || text == "R3") return RequestKind::R3;
  throw ValidationError("unknown request kind '" + text + "' (expected r1, r2 or r3)");
}

void AttackRequest::validate() const {
  if (kind == RequestKind::R3 && count < 2) throw ValidationError("R3 request needs count >= 2");
  if (kind != RequestKind::R3 && count != 1) throw ValidationError(to_string(kind) + " request must have count 1");
  if (kind != RequestKind::R1 && victim_index) {
    throw ValidationError("explicit victim index is only valid for R1 requests");
  }
}

bool VictimSet::is_victim(std::size_t object) const noexcept {
  return std::any_of(victims.begin(), victims.end(), [object](const Victim& v) { return v.object == object; });
}

R1Selection select_victim_r1(const SceneLayout& predictions) {
  const auto& objs = predictions.objects;
  if (objs.empty()) throw ValidationError("scene '" + predictions.id + "' has no predictions");
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < objs.size(); ++i) {
    if (objs[i].confidence.value_or(0.0) < kR1ConfidenceGate) continue;
    if (!best || objs[i].box.area() > objs[*best].box.area()) best = i;
  }
  if (best) return {*best, false};
  std::size_t top = 0;
  for (std::size_t i = 1; i < objs.size(); ++i) {
    if (objs[i].confidence.value_or(0.0) > objs[top].confidence.value_or(0.0)) top = i;
  }
  return {top, true};
}

namespace {

struct Scored {
  std::size_t index;
  double density;
};

std::vector<Scored> score_candidates(const SceneLayout& predictions, CategoryId target, const CategoryGMM& model) {
  std::vector<Scored> out;
  for (std::size_t i = 0; i < predictions.objects.size(); ++i) {
    const auto& o = predictions.objects[i];
    if (o.category == target) continue;
    out.push_back({i, model.weighted_density(o.box)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Scored& a, const Scored& b) { return a.density > b.density; });
  return out;
}

}  // namespace

std::size_t localize_r2(const SceneLayout& predictions, CategoryId target, const CategoryGMM& model) {
  if (predictions.objects.empty()) throw ValidationError("scene '" + predictions.id + "' has no predictions");
  const auto scored = score_candidates(predictions, target, model);
  if (scored.empty()) throw ValidationError("scene '" + predictions.id + "' has no candidate victim boxes");
  return scored.front().index;
}

std::vector<std::size_t> localize_r3(const SceneLayout& predictions, CategoryId target, std::size_t count,
                                     const CategoryGMM& model) {
  const auto scored = score_candidates(predictions, target, model);
  if (scored.size() < count) {
    throw ValidationError("scene '" + predictions.id + "' has " + std::to_string(scored.size()) +
                          " candidate boxes, " + std::to_string(count - scored.size()) + " short of the " +
                          std::to_string(count) + " requested");
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(scored[i].index);
  return out;
}

std::vector<std::size_t> select_random_victims(const SceneLayout& predictions, CategoryId target,
                                               std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < predictions.objects.size(); ++i) {
    if (predictions.objects[i].category != target) pool.push_back(i);
  }
  if (pool.size() < count) {
    throw ValidationError("scene '" + predictions.id + "' has " + std::to_string(pool.size()) +
                          " candidate boxes, fewer than the " + std::to_string(count) + " requested");
  }
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

VictimSet victims_from_indices(const SceneLayout& predictions, const std::vector<std::size_t>& indices,
                               CategoryId target) {
  VictimSet set;
  for (auto i : indices) {
    if (i >= predictions.objects.size()) {
      throw ValidationError("victim index " + std::to_string(i) + " outside scene '" + predictions.id + "'");
    }
    set.victims.push_back({i, predictions.objects[i].box, target});
  }
  return set;
}

VictimSet build_victim_set(const AttackRequest& request, const SceneLayout& predictions, const ModelSet& models,
                           const LabelSpace& labels) {
  request.validate();
  if (!request.target) throw ValidationError("request for scene '" + request.scene_id + "' has no target label");
  const CategoryId target = *request.target;

  auto model_for = [&]() -> const CategoryGMM& {
    auto it = models.find(labels.name(target));
    if (it == models.end()) throw ValidationError("no location model for category '" + labels.name(target) + "'");
    return it->second;
  };

  switch (request.kind) {
    case RequestKind::R1: {
      if (request.victim_index) return victims_from_indices(predictions, {*request.victim_index}, target);
      const auto sel = select_victim_r1(predictions);
      auto set = victims_from_indices(predictions, {sel.index}, target);
      set.r1_fallback = sel.fallback;
      return set;
    }
    case RequestKind::R2:
      return victims_from_indices(predictions, {localize_r2(predictions, target, model_for())}, target);
    case RequestKind::R3:
      return victims_from_indices(predictions, localize_r3(predictions, target, request.count, model_for()), target);
  }
  throw ValidationError("unhandled request kind");
}

}  // namespace glow
