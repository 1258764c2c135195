#include "glow/oracle_attacker.hpp"

#include <random>

#include "glow/error.hpp"

namespace glow {

void OracleConfig::validate() const {
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
    throw ValidationError("flip probability must lie in [0, 1]");
  }
  if (!(jitter >= 0.0)) throw ValidationError("jitter must be non-negative");
}

SceneLayout scene_from_plan(const AttackPlan& plan) {
  SceneLayout scene;
  scene.id = plan.scene_id;
  for (const auto& o : plan.objects) scene.objects.push_back({o.box, o.original, 1.0});
  return scene;
}

SceneLayout execute_plan(const SceneLayout& scene, const AttackPlan& plan, const OracleConfig& config) {
  config.validate();
  if (plan.scene_id != scene.id || plan.objects.size() != scene.objects.size()) {
    throw ValidationError("plan for '" + plan.scene_id + "' does not cover scene '" + scene.id + "'");
  }
  std::mt19937_64 rng(config.seed);
  std::bernoulli_distribution flip(config.flip_probability);
  std::normal_distribution<double> noise(0.0, 1.0);

  SceneLayout out;
  out.id = scene.id;
  out.width = scene.width;
  out.height = scene.height;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& obj = scene.objects[i];
    const auto& planned = plan.objects[i];
    if (!(planned.box == obj.box) || planned.original != obj.category) {
      throw ValidationError("plan object " + std::to_string(i) + " does not match scene '" + scene.id + "'");
    }
    const CategoryId label = flip(rng) ? planned.target : obj.category;
    BoundingBox box = obj.box;
    if (config.jitter > 0.0) {
      const double s = config.jitter;
      const double cx = box.cx() + s * noise(rng);
      const double cy = box.cy() + s * noise(rng);
      const double w = box.w() + s * noise(rng);
      const double h = box.h() + s * noise(rng);
      box = BoundingBox::clamped(cx, cy, w, h);
    }
    out.objects.push_back({box, label, 1.0});
  }
  return out;
}

}  // namespace glow
