#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "glow/error.hpp"
#include "glow/metrics.hpp"
#include "glow/oracle_attacker.hpp"
#include "support/synthetic.hpp"

namespace glow {
namespace {

using testing::prediction;

BoundingBox B(double cx, double cy, double w, double h) { return BoundingBox::make(cx, cy, w, h); }

SceneLayout scene_of(std::string id, std::vector<LabeledBox> objects) {
  SceneLayout s;
  s.id = std::move(id);
  s.objects = std::move(objects);
  return s;
}

const LabelSpace kLabels({"cat", "dog", "sofa", "kite"});
const CategoryId kCat{0}, kDog{1}, kSofa{2}, kKite{3};

// Single isotropic component centered on `box` whose peak density is `peak`:
// (2 pi)^-2 var^-2 = peak.
CategoryGMM peaked_at(const std::string& name, const BoundingBox& box, double peak) {
  const double var = 1.0 / (2.0 * std::numbers::pi * std::sqrt(peak));
  return CategoryGMM(name, {{1.0, to_feature(box), var * Eigen::Matrix4d::Identity()}});
}

TEST(MetricT, Examples) {
  const auto b1 = B(0.3, 0.3, 0.1, 0.1), b2 = B(0.7, 0.7, 0.1, 0.1);
  const auto scene = scene_of("s", {prediction(b1, kDog), prediction(b2, kDog)});

  ModelSet models{{"cat", peaked_at("cat", b1, 0.05)}};
  auto t = metric_T(victims_from_indices(scene, {0}, kCat), models, kLabels);
  EXPECT_NEAR(t.mean, 0.05, 1e-12);
  EXPECT_TRUE(t.pass);

  // Victims of two categories whose models peak at 0.03 and 0.01 on them.
  ModelSet split{{"cat", peaked_at("cat", b1, 0.03)}, {"sofa", peaked_at("sofa", b2, 0.01)}};
  VictimSet mixed;
  mixed.victims = {{0, b1, kCat}, {1, b2, kSofa}};
  t = metric_T(mixed, split, kLabels);
  EXPECT_NEAR(t.mean, 0.02, 1e-12);

  // The inclusive boundary, with the mean forced to equal the threshold.
  EXPECT_TRUE(metric_T(mixed, split, kLabels, t.mean).pass);
  EXPECT_FALSE(metric_T(mixed, split, kLabels, std::nextafter(t.mean, 1.0)).pass);

  const ModelSet far{{"cat", peaked_at("cat", B(0.9, 0.9, 0.05, 0.05), 1e-3)}};
  EXPECT_THROW(metric_T(victims_from_indices(scene, {0}, kCat), ModelSet{}, kLabels), ValidationError);
  EXPECT_FALSE(metric_T(VictimSet{}, models, kLabels).pass);
  EXPECT_LT(metric_T(victims_from_indices(scene, {0}, kCat), far, kLabels).mean, 0.02);
}

TEST(MetricF, Examples) {
  const auto box = B(0.5, 0.5, 0.2, 0.2);
  const auto original = scene_of("s", {prediction(box, kDog)});
  const auto victims = victims_from_indices(original, {0}, kCat);
  const auto cooc = build_cooccurrence(Corpus(kLabels, {scene_of("a", {{box, kCat, {}}, {box, kSofa, {}}})}));

  EXPECT_TRUE(metric_F(scene_of("p", {prediction(box, kCat)}), victims, cooc));
  // IoU of a same-size box shifted by d is (w - d) / (w + d); d = 2w/3 gives 0.2.
  EXPECT_FALSE(metric_F(scene_of("p", {prediction(B(0.5 + 0.2 * 2 / 3, 0.5, 0.2, 0.2), kCat)}), victims, cooc));
  EXPECT_FALSE(metric_F(original, victims, cooc));
  // cat+sofa co-occur, cat+kite never did.
  EXPECT_TRUE(metric_F(scene_of("p", {prediction(box, kCat), prediction(B(0.1, 0.1, 0.1, 0.1), kSofa)}), victims, cooc));
  EXPECT_FALSE(metric_F(scene_of("p", {prediction(box, kCat), prediction(B(0.1, 0.1, 0.1, 0.1), kKite)}), victims, cooc));
}

TEST(MetricR, Examples) {
  const auto a = B(0.3, 0.3, 0.2, 0.2), b = B(0.7, 0.7, 0.2, 0.2);
  const Corpus corpus(kLabels, {scene_of("one", {{a, kCat, {}}}), scene_of("both", {{a, kCat, {}}, {b, kDog, {}}})});

  auto r = metric_R(scene_of("p", {prediction(a, kCat), prediction(b, kDog)}), corpus);
  EXPECT_EQ(r.max_recall, 1.0);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.best_scene, "both");

  r = metric_R(scene_of("p", {prediction(a, kKite)}), corpus);
  EXPECT_EQ(r.max_recall, 0.0);
  EXPECT_FALSE(r.pass);

  const Corpus single(kLabels, {scene_of("one", {{a, kCat, {}}})});
  r = metric_R(scene_of("p", {prediction(a, kCat), prediction(b, kDog)}), single);
  EXPECT_EQ(r.max_recall, 0.5);
  EXPECT_FALSE(r.pass);

  // Growing the corpus never lowers the best recall.
  EXPECT_GE(metric_R(scene_of("p", {prediction(a, kCat), prediction(b, kDog)}), corpus).max_recall, r.max_recall);

  // One corpus box serves one prediction.
  r = metric_R(scene_of("p", {prediction(a, kCat), prediction(a, kCat)}), single);
  EXPECT_EQ(r.max_recall, 0.5);
}

TEST(MetricEC, Examples) {
  const auto box = B(0.5, 0.5, 0.2, 0.2);
  const auto one = scene_of("p", {prediction(box, kCat), prediction(box, kDog)});
  const auto two = scene_of("p", {prediction(box, kCat), prediction(box, kCat)});
  const auto three = scene_of("p", {prediction(box, kCat), prediction(box, kCat), prediction(box, kCat)});
  const auto none = scene_of("p", {prediction(box, kDog)});
  EXPECT_TRUE(metric_E(one, kCat));
  EXPECT_TRUE(metric_E(three, kCat));
  EXPECT_FALSE(metric_E(none, kCat));
  EXPECT_TRUE(metric_C(two, kCat, 2));
  EXPECT_FALSE(metric_C(three, kCat, 2));
  EXPECT_FALSE(metric_C(none, kCat, 2));
  for (const auto* s : {&one, &two, &three, &none})
    for (std::size_t k = 1; k <= 3; ++k)
      if (metric_C(*s, kCat, k)) EXPECT_TRUE(metric_E(*s, kCat));
}

class EvaluateOnWorld : public ::testing::Test {
 protected:
  void SetUp() override {
    FitOptions opt;
    opt.seed = 1;
    models_ = fit_category_models(corpus_, opt, 1);
  }
  PlannedScene planned(const testing::VictimCase& vc, RequestKind kind) {
    PlannedScene p;
    p.request.scene_id = vc.scene.id;
    p.request.kind = kind;
    p.request.target = vc.target;
    p.request.count = vc.planted.size();
    if (kind == RequestKind::R1) p.request.victim_index = vc.planted[0];
    const auto victims = victims_from_indices(vc.scene, vc.planted, vc.target);
    PlanConfig cfg;
    cfg.match_threshold = 0.5;
    p.plan = generate_plan(vc.scene, victims, corpus_, cfg).plan;
    return p;
  }
  testing::SyntheticWorld world_{55};
  Corpus corpus_ = world_.make_corpus(400);
  ModelSet models_;
  CooccurrenceMatrix cooc_ = build_cooccurrence(corpus_);
};

TEST_F(EvaluateOnWorld, PerfectAttackOnSelfSourcedScenes) {
  const auto cases = testing::derive_victim_cases(corpus_, 1, 30, 0.0, 4);
  ASSERT_GE(cases.size(), 20u);
  std::vector<PlannedScene> plans;
  std::vector<SceneLayout> attacked;
  for (const auto& vc : cases) {
    plans.push_back(planned(vc, RequestKind::R2));
    attacked.push_back(execute_plan(vc.scene, *plans.back().plan, OracleConfig{}));
  }
  const EvaluationContext ctx{corpus_, cooc_, models_, {}};
  const auto report = evaluate(plans, attacked, ctx);
  const auto& s = report.summary.at(RequestKind::R2);
  EXPECT_EQ(s.evaluated, cases.size());
  EXPECT_EQ(s.rates.at("E+R"), 1.0);
  EXPECT_GT(s.rates.at("T"), 0.0);
  for (const auto& ev : report.scenes) {
    EXPECT_TRUE(ev.members.at("F"));
    EXPECT_TRUE(ev.members.at("E"));
    EXPECT_FALSE(ev.members.contains("C"));
  }
  const auto again = evaluate(plans, attacked, ctx, 3);
  for (std::size_t i = 0; i < report.scenes.size(); ++i) {
    EXPECT_EQ(report.scenes[i].columns, again.scenes[i].columns);
    EXPECT_EQ(report.scenes[i].density, again.scenes[i].density);
  }
}

TEST_F(EvaluateOnWorld, R1HasNoExistenceOrCountColumns) {
  const auto cases = testing::derive_victim_cases(corpus_, 1, 5, 0.0, 2);
  std::vector<PlannedScene> plans;
  std::vector<SceneLayout> attacked;
  for (const auto& vc : cases) {
    plans.push_back(planned(vc, RequestKind::R1));
    attacked.push_back(execute_plan(vc.scene, *plans.back().plan, OracleConfig{}));
  }
  const auto report = evaluate(plans, attacked, {corpus_, cooc_, models_, {}});
  for (const auto& ev : report.scenes) {
    EXPECT_TRUE(ev.evaluated);
    EXPECT_FALSE(ev.members.contains("E"));
    EXPECT_FALSE(ev.members.contains("C"));
    EXPECT_FALSE(ev.members.contains("T"));
    EXPECT_EQ(ev.columns.size(), 2u);
  }
}

TEST_F(EvaluateOnWorld, R3CountsAndUnevaluated) {
  const auto cases = testing::derive_victim_cases(corpus_, 2, 6, 0.0, 9);
  ASSERT_FALSE(cases.empty());
  std::vector<PlannedScene> plans;
  for (const auto& vc : cases) plans.push_back(planned(vc, RequestKind::R3));
  PlannedScene failed;
  failed.request.scene_id = "nowhere";
  failed.note = "no layout";
  plans.push_back(failed);

  const auto empty = evaluate(plans, {}, {corpus_, cooc_, models_, {}});
  EXPECT_EQ(empty.unevaluated, plans.size());
  EXPECT_EQ(empty.summary.at(RequestKind::R3).evaluated, 0u);
  EXPECT_EQ(empty.summary.at(RequestKind::R3).rates.at("C+R"), 0.0);

  std::vector<SceneLayout> attacked;
  for (std::size_t i = 0; i < cases.size(); ++i) attacked.push_back(execute_plan(cases[i].scene, *plans[i].plan, {}));
  const auto report = evaluate(plans, attacked, {corpus_, cooc_, models_, {}});
  EXPECT_EQ(report.unevaluated, 1u);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& ev = report.scenes[i];
    EXPECT_EQ(ev.members.at("C"), plans[i].plan->count_target(cases[i].target) == 2);
  }
  EXPECT_FALSE(report.scenes.back().evaluated);
  EXPECT_NE(report.scenes.back().note.find("no layout"), std::string::npos);
}

TEST(ReportColumns, PerKind) {
  EXPECT_EQ(report_columns(RequestKind::R1), (std::vector<std::string>{"F", "F+R"}));
  EXPECT_EQ(report_columns(RequestKind::R2), (std::vector<std::string>{"T", "F+T", "E+R"}));
  EXPECT_EQ(report_columns(RequestKind::R3), (std::vector<std::string>{"T", "F+T+C", "C+R"}));
}

}  // namespace
}  // namespace glow
