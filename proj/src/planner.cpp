#include "glow/planner.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include "glow/assignment.hpp"
#include "glow/error.hpp"

namespace glow {

void PlanConfig::validate() const {
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be non-negative");
  if (!(match_threshold > 0.0 && match_threshold <= 1.0)) {
    throw ValidationError("match threshold must lie in (0, 1]");
  }
  if (candidate_cap == 0) throw ValidationError("candidate cap must be positive");
}

std::size_t AttackPlan::count_target(CategoryId c) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(objects.begin(), objects.end(), [c](const PlanObject& o) { return o.target == c; }));
}

double pair_cost(const BoundingBox& a, const BoundingBox& b) noexcept { return l1_box(a, b) + (1.0 - giou(a, b)); }

namespace {

std::map<CategoryId, std::size_t> requested_counts(const VictimSet& victims) {
  std::map<CategoryId, std::size_t> need;
  for (const auto& v : victims.victims) ++need[v.target];
  return need;
}

AttackPlan base_plan(const SceneLayout& scene, const VictimSet& victims, std::string generator) {
  AttackPlan plan;
  plan.scene_id = scene.id;
  plan.generator = std::move(generator);
  plan.victims = victims;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& o = scene.objects[i];
    plan.objects.push_back({o.box, o.category, o.category, false});
  }
  for (const auto& v : victims.victims) {
    if (v.object >= plan.objects.size()) throw ValidationError("victim index outside scene '" + scene.id + "'");
    plan.objects[v.object].target = v.target;
    plan.objects[v.object].victim = true;
  }
  return plan;
}

}  // namespace

CandidatePool candidate_pool(const Corpus& corpus, const VictimSet& victims, std::size_t cap) {
  const auto need = requested_counts(victims);
  struct Entry {
    std::size_t index;
    std::size_t density;
  };
  std::vector<Entry> entries;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& scene = corpus.scenes()[s];
    bool ok = true;
    std::size_t density = 0;
    for (const auto& [c, k] : need) {
      const auto have = scene.count(c);
      if (have < k) {
        ok = false;
        break;
      }
      density += have;
    }
    if (ok) entries.push_back({s, density});
  }
  if (entries.empty()) throw InfeasibleError("no feasible corpus layout contains the requested target labels");
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.density > b.density; });
  CandidatePool pool;
  pool.capped = entries.size() > cap;
  if (pool.capped) entries.resize(cap);
  // Densest-first decides who survives the cap; scoring order is corpus order.
  for (const auto& e : entries) pool.scenes.push_back(e.index);
  std::sort(pool.scenes.begin(), pool.scenes.end());
  return pool;
}

double victim_alignment(const VictimSet& victims, const SceneLayout& candidate) {
  const auto x = victims.size();
  if (x == 0) return 0.0;
  const auto m = candidate.objects.size();
  if (m == 0) return 0.0;
  if (x == 1) {
    double best = 0.0;
    const auto& v = victims.victims.front();
    for (const auto& o : candidate.objects) {
      if (o.category == v.target) best = std::max(best, iou(v.box, o.box));
    }
    return best;
  }
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(m));
  for (std::size_t p = 0; p < x; ++p) {
    const auto& v = victims.victims[p];
    for (std::size_t j = 0; j < m; ++j) {
      const auto& o = candidate.objects[j];
      if (o.category == v.target) cost(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) = -iou(v.box, o.box);
    }
  }
  const auto result = solve_assignment(cost);
  double sum = 0.0;
  for (std::size_t p = 0; p < x; ++p) {
    const int j = result.row_to_col[p];
    if (j >= 0) sum -= cost(static_cast<Eigen::Index>(p), j);
  }
  return sum / static_cast<double>(x);
}

LayoutMatch match_layout(const SceneLayout& scene, const VictimSet& victims, const SceneLayout& candidate,
                         double giou_floor) {
  LayoutMatch match;
  match.assignment.assign(scene.objects.size(), -1);
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (!victims.is_victim(i)) rest.push_back(i);
  }
  if (rest.empty()) return match;
  const auto m = candidate.objects.size();
  if (m < rest.size()) {
    match.feasible = false;
    match.matched_fraction = 0.0;
    return match;
  }

  Eigen::MatrixXd cost(static_cast<Eigen::Index>(rest.size()), static_cast<Eigen::Index>(m));
  for (std::size_t r = 0; r < rest.size(); ++r) {
    for (std::size_t j = 0; j < m; ++j) {
      cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          pair_cost(scene.objects[rest[r]].box, candidate.objects[j].box);
    }
  }
  const auto result = solve_assignment(cost);
  std::size_t matched = 0;
  for (std::size_t r = 0; r < rest.size(); ++r) {
    const int j = result.row_to_col[r];
    match.assignment[rest[r]] = j;
    if (giou(scene.objects[rest[r]].box, candidate.objects[static_cast<std::size_t>(j)].box) > giou_floor) ++matched;
  }
  const auto n = static_cast<double>(rest.size());
  match.s2 = result.total_cost / n;
  match.matched_fraction = static_cast<double>(matched) / n;
  return match;
}

PlanResult generate_plan(const SceneLayout& scene, const VictimSet& victims, const Corpus& corpus,
                         const PlanConfig& config) {
  config.validate();
  const auto pool = candidate_pool(corpus, victims, config.candidate_cap);
  const auto& scenes = corpus.scenes();

  std::vector<CandidateScore> scores(pool.scenes.size());
  auto score_one = [&](std::size_t k) {
    const auto idx = pool.scenes[k];
    const auto& cand = scenes[idx];
    auto& out = scores[k];
    out.corpus_index = idx;
    out.scene_id = cand.id;
    const auto match = match_layout(scene, victims, cand, config.giou_floor);
    out.feasible = match.feasible;
    if (!match.feasible) return;
    out.s1 = victim_alignment(victims, cand);
    out.s2 = match.s2;
    out.score = composite_score(out.s1, out.s2, config.lambda);
    out.matched_fraction = match.matched_fraction;
    out.passes = match.matched_fraction >= config.match_threshold;
  };

  const unsigned workers = std::max(1u, config.workers);
  if (workers == 1 || scores.size() < 2 * workers) {
    for (std::size_t k = 0; k < scores.size(); ++k) score_one(k);
  } else {
    std::vector<std::jthread> threads;
    for (unsigned t = 0; t < workers; ++t) {
      threads.emplace_back([&, t] {
        for (std::size_t k = t; k < scores.size(); k += workers) score_one(k);
      });
    }
  }

  std::vector<CandidateScore> ranked;
  for (auto& s : scores) {
    if (s.feasible) ranked.push_back(std::move(s));
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const CandidateScore& a, const CandidateScore& b) { return a.score > b.score; });

  auto best = std::find_if(ranked.begin(), ranked.end(), [](const CandidateScore& s) { return s.passes; });
  if (best == ranked.end()) {
    std::optional<CandidateScore> rejected;
    if (!ranked.empty()) rejected = ranked.front();
    throw NoPassingCandidate("no corpus layout for scene '" + scene.id + "' matches the required fraction of objects",
                             rejected);
  }

  const auto& source = scenes[best->corpus_index];
  const auto match = match_layout(scene, victims, source, config.giou_floor);
  AttackPlan plan = base_plan(scene, victims, "glow");
  for (std::size_t i = 0; i < plan.objects.size(); ++i) {
    if (!plan.objects[i].victim) {
      plan.objects[i].target = source.objects[static_cast<std::size_t>(match.assignment[i])].category;
    }
  }
  plan.source_scene = source.id;
  plan.s1 = best->s1;
  plan.s2 = best->s2;
  plan.score = best->score;
  plan.matched_fraction = best->matched_fraction;
  plan.pool_size = pool.scenes.size();
  plan.pool_capped = pool.capped;
  return {std::move(plan), std::move(ranked)};
}

AttackPlan plan_same(const SceneLayout& scene, const VictimSet& victims, CategoryId target) {
  AttackPlan plan = base_plan(scene, victims, "same");
  for (auto& o : plan.objects) o.target = target;
  return plan;
}

AttackPlan plan_random(const SceneLayout& scene, const VictimSet& victims, std::size_t label_count,
                       std::uint64_t seed) {
  AttackPlan plan = base_plan(scene, victims, "random");
  std::vector<std::int32_t> perm(label_count);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = label_count; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  for (auto& o : plan.objects) {
    if (o.victim) continue;
    const auto c = static_cast<std::size_t>(o.original.value);
    if (c >= label_count) throw ValidationError("scene label outside the label space");
    o.target = CategoryId{perm[c]};
  }
  return plan;
}

AttackPlan plan_identity(const SceneLayout& scene, const VictimSet& victims) {
  return base_plan(scene, victims, "identity");
}

}  // namespace glow
