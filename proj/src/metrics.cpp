#include "glow/metrics.hpp"

#include <algorithm>
#include <set>
#include <thread>
#include <unordered_map>

#include "glow/assignment.hpp"
#include "glow/error.hpp"

namespace glow {

DensityScore metric_T(const VictimSet& victims, const ModelSet& models, const LabelSpace& labels, double threshold) {
  if (victims.victims.empty()) return {0.0, false};
  double sum = 0.0;
  for (const auto& v : victims.victims) {
    const auto& name = labels.name(v.target);
    auto it = models.find(name);
    if (it == models.end()) throw ValidationError("no location model for category '" + name + "'");
    sum += it->second.weighted_density(v.box);
  }
  const double mean = sum / static_cast<double>(victims.size());
  return {mean, mean >= threshold};
}

bool metric_F(const SceneLayout& predictions, const VictimSet& victims, const CooccurrenceMatrix& cooccurrence,
              double iou_threshold) {
  for (const auto& v : victims.victims) {
    const bool hit = std::any_of(predictions.objects.begin(), predictions.objects.end(), [&](const LabeledBox& p) {
      return p.category == v.target && iou(p.box, v.box) > iou_threshold;
    });
    if (!hit) return false;
  }
  std::set<CategoryId> present;
  for (const auto& p : predictions.objects) present.insert(p.category);
  for (auto a = present.begin(); a != present.end(); ++a) {
    for (auto b = std::next(a); b != present.end(); ++b) {
      if (cooccurrence.at(*a, *b) == 0) return false;
    }
  }
  return true;
}

RecallScore metric_R(const SceneLayout& predictions, const Corpus& corpus, const MetricConfig& config) {
  RecallScore out;
  const auto& preds = predictions.objects;
  if (preds.empty()) return out;
  const auto p = preds.size();
  // Valid pairs cost < 1/(p+1) each, invalid pairs cost 1, so minimizing total
  // cost maximizes the number of valid pairs first.
  const double scale = 1.0 / static_cast<double>(p + 1);

  std::set<CategoryId> wanted;
  for (const auto& o : preds) wanted.insert(o.category);

  for (const auto& scene : corpus.scenes()) {
    if (std::none_of(scene.objects.begin(), scene.objects.end(),
                     [&](const LabeledBox& o) { return wanted.contains(o.category); })) {
      continue;
    }
    const auto m = scene.objects.size();
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double c = 1.0;
        if (preds[i].category == scene.objects[j].category) {
          const double ov = iou(preds[i].box, scene.objects[j].box);
          if (ov >= config.recall_iou) c = (1.0 - ov) * scale;
        }
        cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
      }
    }
    const auto result = solve_assignment(cost);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < p; ++i) {
      const int j = result.row_to_col[i];
      if (j >= 0 && cost(static_cast<Eigen::Index>(i), j) < 1.0) ++hits;
    }
    const double recall = static_cast<double>(hits) / static_cast<double>(p);
    if (recall > out.max_recall) {
      out.max_recall = recall;
      out.best_scene = scene.id;
    }
  }
  out.pass = out.max_recall > config.recall_floor;
  return out;
}

bool metric_E(const SceneLayout& predictions, CategoryId target) { return predictions.contains(target); }

bool metric_C(const SceneLayout& predictions, CategoryId target, std::size_t count) {
  return predictions.count(target) == count;
}

const std::vector<std::string>& report_columns(RequestKind kind) {
  static const std::vector<std::string> r1{"F", "F+R"};
  static const std::vector<std::string> r2{"T", "F+T", "E+R"};
  static const std::vector<std::string> r3{"T", "F+T+C", "C+R"};
  switch (kind) {
    case RequestKind::R1: return r1;
    case RequestKind::R2: return r2;
    case RequestKind::R3: return r3;
  }
  return r2;
}

SceneEvaluation evaluate_scene(const PlannedScene& planned, const SceneLayout* predictions,
                               const EvaluationContext& ctx) {
  const auto& request = planned.request;
  SceneEvaluation ev;
  ev.scene_id = request.scene_id;
  ev.kind = request.kind;
  if (!planned.plan) {
    ev.note = planned.note.empty() ? "no plan for scene" : "planning failed: " + planned.note;
    return ev;
  }
  const auto& plan = *planned.plan;
  ev.generator = plan.generator;
  if (!predictions) {
    ev.note = "no attacked predictions for scene";
    return ev;
  }
  if (!request.target) {
    ev.note = "request has no target label";
    return ev;
  }
  const CategoryId target = *request.target;
  const auto& labels = ctx.corpus.labels();
  const auto& cfg = ctx.config;

  auto& m = ev.members;
  m["F"] = metric_F(*predictions, plan.victims, ctx.cooccurrence, cfg.fooling_iou);
  const auto r = metric_R(*predictions, ctx.corpus, cfg);
  ev.recall = r.max_recall;
  m["R"] = r.pass;
  if (request.kind != RequestKind::R1) {
    const auto t = metric_T(plan.victims, ctx.models, labels, cfg.density_threshold);
    ev.density = t.mean;
    m["T"] = t.pass;
    m["E"] = metric_E(*predictions, target);
  }
  if (request.kind == RequestKind::R3) m["C"] = metric_C(*predictions, target, request.count);

  for (const auto& col : report_columns(request.kind)) {
    bool pass = true;
    std::size_t start = 0;
    while (start <= col.size()) {
      auto end = col.find('+', start);
      if (end == std::string::npos) end = col.size();
      pass = pass && m.at(col.substr(start, end - start));
      start = end + 1;
    }
    ev.columns[col] = pass;
  }
  ev.evaluated = true;
  return ev;
}

EvaluationReport evaluate(const std::vector<PlannedScene>& plans, const std::vector<SceneLayout>& attacked,
                          const EvaluationContext& ctx, unsigned workers) {
  std::unordered_map<std::string, const SceneLayout*> by_id;
  for (const auto& s : attacked) by_id.emplace(s.id, &s);

  EvaluationReport report;
  report.config = ctx.config;
  report.scenes.resize(plans.size());
  auto run = [&](std::size_t i) {
    auto it = by_id.find(plans[i].request.scene_id);
    report.scenes[i] = evaluate_scene(plans[i], it == by_id.end() ? nullptr : it->second, ctx);
  };
  const unsigned pool = std::max(1u, workers);
  if (pool == 1) {
    for (std::size_t i = 0; i < plans.size(); ++i) run(i);
  } else {
    std::vector<std::jthread> threads;
    for (unsigned t = 0; t < pool; ++t) {
      threads.emplace_back([&, t] {
        for (std::size_t i = t; i < plans.size(); i += pool) run(i);
      });
    }
  }

  std::map<RequestKind, std::map<std::string, std::size_t>> passes;
  for (const auto& ev : report.scenes) {
    auto& summary = report.summary[ev.kind];
    if (!ev.evaluated) {
      ++summary.unevaluated;
      ++report.unevaluated;
      continue;
    }
    ++summary.evaluated;
    for (const auto& [col, ok] : ev.columns) passes[ev.kind][col] += ok ? 1 : 0;
  }
  for (auto& [kind, summary] : report.summary) {
    for (const auto& col : report_columns(kind)) {
      summary.rates[col] =
          summary.evaluated == 0 ? 0.0
                                 : static_cast<double>(passes[kind][col]) / static_cast<double>(summary.evaluated);
    }
  }
  return report;
}

}  // namespace glow
