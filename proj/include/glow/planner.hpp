#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glow/error.hpp"
#include "glow/ingestion.hpp"
#include "glow/localization.hpp"

namespace glow {

struct PlanConfig {
  double lambda = 1.0;
  double match_threshold = 0.95;  // required fraction of matched non-victims
  double giou_floor = 0.0;        // a matched pair needs GIoU above this
  std::size_t candidate_cap = 20000;
  unsigned workers = 1;

  void validate() const;
};

struct PlanObject {
  BoundingBox box;
  CategoryId original;
  CategoryId target;
  bool victim = false;
};

/// Full-scene label assignment handed to a downstream attacker. Scores are
/// only set by the layout-search generator.
struct AttackPlan {
  std::string scene_id;
  std::string generator;
  std::vector<PlanObject> objects;
  VictimSet victims;

  std::optional<std::string> source_scene;  // t*
  std::optional<double> s1, s2, score, matched_fraction;
  std::size_t pool_size = 0;
  bool pool_capped = false;

  std::size_t count_target(CategoryId c) const noexcept;
};

struct LayoutMatch {
  std::vector<int> assignment;  // scene object -> corpus object; -1 for victims
  double s2 = 0.0;
  double matched_fraction = 1.0;
  bool feasible = true;
};

struct CandidateScore {
  std::size_t corpus_index = 0;
  std::string scene_id;
  double s1 = 0.0;
  double s2 = 0.0;
  double score = 0.0;
  double matched_fraction = 0.0;
  bool feasible = false;
  bool passes = false;
};

// Raised when every candidate misses the match-fraction gate.
class NoPassingCandidate : public InfeasibleError {
 public:
  NoPassingCandidate(const std::string& what, std::optional<CandidateScore> best)
      : InfeasibleError(what), best_rejected(std::move(best)) {}
  std::optional<CandidateScore> best_rejected;
};

// l1_box + (1 - giou); zero for identical boxes.
double pair_cost(const BoundingBox& a, const BoundingBox& b) noexcept;

struct CandidatePool {
  std::vector<std::size_t> scenes;  // corpus indices, densest-first
  bool capped = false;
};

// Scenes holding at least as many instances of each target category as there
// are victims requesting it. Throws InfeasibleError when none qualify.
CandidatePool candidate_pool(const Corpus& corpus, const VictimSet& victims, std::size_t cap);

// Mean best IoU between victims and same-category corpus boxes; with several
// victims each corpus box serves at most one victim.
double victim_alignment(const VictimSet& victims, const SceneLayout& candidate);

LayoutMatch match_layout(const SceneLayout& scene, const VictimSet& victims, const SceneLayout& candidate,
                         double giou_floor = 0.0);

constexpr double composite_score(double s1, double s2, double lambda) noexcept { return s1 - lambda * s2; }

struct PlanResult {
  AttackPlan plan;
  std::vector<CandidateScore> ranked;  // every scored candidate, best first
};

PlanResult generate_plan(const SceneLayout& scene, const VictimSet& victims, const Corpus& corpus,
                         const PlanConfig& config);

AttackPlan plan_same(const SceneLayout& scene, const VictimSet& victims, CategoryId target);
AttackPlan plan_random(const SceneLayout& scene, const VictimSet& victims, std::size_t label_count,
                       std::uint64_t seed);
AttackPlan plan_identity(const SceneLayout& scene, const VictimSet& victims);

}  // namespace glow
