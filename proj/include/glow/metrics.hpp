#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "glow/ingestion.hpp"
#include "glow/localization.hpp"
#include "glow/planner.hpp"

namespace glow {

/// Thresholds for the consistency metrics. T compares inclusively (>=),
/// R strictly (>); both defaults are echoed in every report.
struct MetricConfig {
  double density_threshold = 0.02;
  double fooling_iou = 0.3;
  double recall_iou = 0.5;
  double recall_floor = 0.5;
};

struct DensityScore {
  double mean = 0.0;
  bool pass = false;
};

struct RecallScore {
  double max_recall = 0.0;
  bool pass = false;
  std::optional<std::string> best_scene;
};

DensityScore metric_T(const VictimSet& victims, const ModelSet& models, const LabelSpace& labels,
                      double threshold = 0.02);

// Every victim has a prediction of its target label overlapping the victim's
// planned box with IoU > iou_threshold, and every pair of distinct predicted
// categories has co-occurred in the corpus.
bool metric_F(const SceneLayout& predictions, const VictimSet& victims, const CooccurrenceMatrix& cooccurrence,
              double iou_threshold = 0.3);

// Best recall of the predictions against any single corpus scene: predicted
// objects assigned one-to-one to same-category corpus boxes with IoU >= recall_iou,
// divided by the number of predicted objects.
RecallScore metric_R(const SceneLayout& predictions, const Corpus& corpus, const MetricConfig& config = {});

bool metric_E(const SceneLayout& predictions, CategoryId target);
bool metric_C(const SceneLayout& predictions, CategoryId target, std::size_t count);

// Column names per request kind, in table order.
const std::vector<std::string>& report_columns(RequestKind kind);

struct SceneEvaluation {
  std::string scene_id;
  RequestKind kind = RequestKind::R2;
  std::string generator;
  bool evaluated = false;
  std::string note;
  std::optional<double> density;  // T value
  std::optional<double> recall;   // R value
  std::map<std::string, bool> members;  // F, T, R, E, C as applicable
  std::map<std::string, bool> columns;  // report columns for the kind
};

// A request with its plan; `plan` is empty when planning failed (`note` says why).
struct PlannedScene {
  AttackRequest request;
  std::optional<AttackPlan> plan;
  std::string note;
};

struct KindSummary {
  std::size_t evaluated = 0;
  std::size_t unevaluated = 0;
  std::map<std::string, double> rates;  // column -> pass fraction over evaluated scenes
};

struct EvaluationReport {
  MetricConfig config;
  std::vector<SceneEvaluation> scenes;
  std::map<RequestKind, KindSummary> summary;
  std::size_t unevaluated = 0;
};

struct EvaluationContext {
  const Corpus& corpus;
  const CooccurrenceMatrix& cooccurrence;
  const ModelSet& models;
  MetricConfig config;
};

SceneEvaluation evaluate_scene(const PlannedScene& planned, const SceneLayout* predictions,
                               const EvaluationContext& ctx);

// Scenes without an attacked prediction set are reported unevaluated and
// excluded from the rates.
EvaluationReport evaluate(const std::vector<PlannedScene>& plans, const std::vector<SceneLayout>& attacked,
                          const EvaluationContext& ctx, unsigned workers = 1);

}  // namespace glow
