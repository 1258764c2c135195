#pragma once

#include <cstdint>

#include "glow/planner.hpp"

namespace glow {

// Simulated attacker: each object independently takes its planned label with
// probability `flip_probability`, and every box is jittered by N(0, jitter^2)
// per coordinate (then clamped back to a valid box).
struct OracleConfig {
  double flip_probability = 1.0;
  double jitter = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Output has exactly one prediction per scene object, confidence 1.0.
// Throws ValidationError if the plan does not describe `scene`.
SceneLayout execute_plan(const SceneLayout& scene, const AttackPlan& plan, const OracleConfig& config);

// Scene reconstructed from the plan's original labels and boxes.
SceneLayout scene_from_plan(const AttackPlan& plan);

}  // namespace glow
