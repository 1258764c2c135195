#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "glow/error.hpp"
#include "glow/location_model.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace glow {
namespace {

std::vector<Feature> two_clusters(std::size_t per_cluster, std::uint64_t seed, const Feature& m1, const Feature& m2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.02);
  std::vector<Feature> out;
  for (std::size_t i = 0; i < per_cluster; ++i) {
    out.push_back(m1 + Feature(n(rng), n(rng), n(rng), n(rng)));
    out.push_back(m2 + Feature(n(rng), n(rng), n(rng), n(rng)));
  }
  return out;
}

const Feature kMeanA(0.2, 0.3, 0.1, 0.15);
const Feature kMeanB(0.7, 0.8, 0.3, 0.25);

TEST(FitGmm, DegenerateClusterGetsFloor) {
  const Feature x0(0.4, 0.6, 0.2, 0.1);
  const std::vector<Feature> samples(100, x0);
  FitOptions opt;
  opt.components = 1;
  const auto fit = fit_gmm(samples, opt);
  const auto& c = fit.model.parameters()[0];
  EXPECT_TRUE(c.mean.isApprox(x0, 1e-12));
  EXPECT_TRUE(c.covariance.isApprox(1e-6 * Eigen::Matrix4d::Identity(), 1e-9));
  EXPECT_DOUBLE_EQ(c.weight, 1.0);
}

TEST(FitGmm, RecoversTwoClusters) {
  const auto samples = two_clusters(300, 4, kMeanA, kMeanB);
  FitOptions opt;
  opt.components = 2;
  opt.seed = 17;
  const auto fit = fit_gmm(samples, opt);
  const auto& p = fit.model.parameters();
  const bool a_first = (p[0].mean - kMeanA).norm() < (p[1].mean - kMeanA).norm();
  const auto& ma = a_first ? p[0].mean : p[1].mean;
  const auto& mb = a_first ? p[1].mean : p[0].mean;
  EXPECT_LT((ma - kMeanA).cwiseAbs().maxCoeff(), 0.05);
  EXPECT_LT((mb - kMeanB).cwiseAbs().maxCoeff(), 0.05);
  EXPECT_NEAR(p[0].weight, 0.5, 0.02);
}

TEST(FitGmm, Deterministic) {
  testing::SyntheticWorld world(3);
  std::vector<Feature> samples;
  for (int i = 0; i < 400; ++i) samples.push_back(to_feature(world.sample_box(CategoryId{i % 8})));
  FitOptions opt;
  opt.seed = 99;
  const auto a = fit_gmm(samples, opt), b = fit_gmm(samples, opt);
  ASSERT_EQ(a.log_likelihood, b.log_likelihood);
  for (std::size_t q = 0; q < a.model.components(); ++q) {
    EXPECT_EQ(a.model.parameters()[q].weight, b.model.parameters()[q].weight);
    EXPECT_EQ(a.model.parameters()[q].mean, b.model.parameters()[q].mean);
    EXPECT_EQ(a.model.parameters()[q].covariance, b.model.parameters()[q].covariance);
  }
}

TEST(FitGmm, LogLikelihoodNonDecreasing) {
  testing::SyntheticWorld world(8);
  std::vector<Feature> samples;
  for (int i = 0; i < 1500; ++i) samples.push_back(to_feature(world.sample_box(CategoryId{i % 8})));
  FitOptions opt;
  opt.seed = 5;
  const auto fit = fit_gmm(samples, opt);
  ASSERT_GE(fit.log_likelihood.size(), 2u);
  for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i) {
    EXPECT_GE(fit.log_likelihood[i], fit.log_likelihood[i - 1] - 1e-9) << "iteration " << i;
  }
}

TEST(FitGmm, TranslationMovesMeans) {
  const auto samples = two_clusters(200, 6, kMeanA, kMeanB);
  const Feature t(0.125, -0.0625, 0.25, 0.5);
  std::vector<Feature> shifted;
  for (const auto& x : samples) shifted.push_back(x + t);
  FitOptions opt;
  opt.components = 2;
  opt.seed = 1;
  const auto a = fit_gmm(samples, opt), b = fit_gmm(shifted, opt);
  EXPECT_EQ(a.iterations, b.iterations);
  for (std::size_t q = 0; q < 2; ++q) {
    EXPECT_LT((a.model.parameters()[q].mean + t - b.model.parameters()[q].mean).norm(), 1e-6);
  }
}

TEST(FitGmm, Errors) {
  const std::vector<Feature> one(1, Feature(0.5, 0.5, 0.1, 0.1));
  EXPECT_THROW(fit_gmm(one, FitOptions{}), ValidationError);
  const std::vector<Feature> three(3, Feature(0.5, 0.5, 0.1, 0.1));
  EXPECT_THROW(fit_gmm(three, FitOptions{}), ValidationError);
}

TEST(WeightedDensity, StandardNormalAtMean) {
  const CategoryGMM m("x", {{1.0, Feature::Zero(), Eigen::Matrix4d::Identity()}});
  EXPECT_NEAR(m.weighted_density(Feature::Zero()), 1.0 / (4.0 * std::numbers::pi * std::numbers::pi), 1e-15);
}

TEST(WeightedDensity, MatchesDirectMixtureOverQ) {
  const auto samples = two_clusters(150, 12, kMeanA, kMeanB);
  FitOptions opt;
  opt.components = 3;
  opt.seed = 2;
  const auto model = fit_gmm(samples, opt).model;
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Feature x(u(rng), u(rng), u(rng), u(rng));
    double direct = 0.0;
    for (const auto& c : model.parameters()) direct += c.weight * testing::gaussian_pdf(x, c.mean, c.covariance);
    direct /= 3.0;
    const double got = model.weighted_density(x);
    ASSERT_GE(got, 0.0);
    ASSERT_NEAR(got, direct, 1e-9 * std::max(1.0, direct));
  }
}

TEST(WeightedDensity, InvalidModelsRejected) {
  EXPECT_THROW(CategoryGMM("x", {{0.5, Feature::Zero(), Eigen::Matrix4d::Identity()}}), ValidationError);
  Eigen::Matrix4d bad = Eigen::Matrix4d::Identity();
  bad(0, 0) = -1.0;
  EXPECT_THROW(CategoryGMM("x", {{1.0, Feature::Zero(), bad}}), ValidationError);
  EXPECT_THROW(CategoryGMM("x", {}), ValidationError);
}

class ModelFile : public ::testing::Test {
 protected:
  std::filesystem::path dir = std::filesystem::temp_directory_path() / "glow_model_test";
  void SetUp() override { std::filesystem::create_directories(dir); }
};

TEST_F(ModelFile, RoundTrip) {
  testing::SyntheticWorld world(21);
  const auto corpus = world.make_corpus(300);
  FitOptions opt;
  opt.seed = 7;
  const auto models = fit_category_models(corpus, opt, 2);
  ASSERT_EQ(models.size(), 8u);
  save_models(models, dir / "m.txt");
  const auto back = load_models(dir / "m.txt");
  ASSERT_EQ(back.size(), models.size());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& [name, m] : models) {
    const auto& r = back.at(name);
    EXPECT_EQ(r.components(), m.components());
    EXPECT_EQ(r.sample_count, m.sample_count);
    for (int k = 0; k < 100; ++k) {
      const Feature x(u(rng), u(rng), u(rng), u(rng));
      const double a = m.weighted_density(x), b = r.weighted_density(x);
      ASSERT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a)));
    }
  }
  EXPECT_EQ(serialize_models(back), serialize_models(models));
}

TEST_F(ModelFile, Errors) {
  EXPECT_TRUE(parse_models(serialize_models({})).empty());
  testing::SyntheticWorld world(2);
  FitOptions opt;
  opt.seed = 1;
  const auto text = serialize_models(fit_category_models(world.make_corpus(100), opt, 1));
  EXPECT_THROW(parse_models(text.substr(0, text.size() / 2)), ParseError);
  auto bumped = text;
  bumped.replace(bumped.find(" 1\n"), 3, " 9\n");
  EXPECT_THROW(parse_models(bumped), ParseError);
  EXPECT_THROW(load_models(dir / "missing.txt"), Error);
}

TEST(FitCategoryModels, SmallCategoriesFallBack) {
  LabelSpace labels({"many", "few", "one"});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  std::vector<SceneLayout> scenes;
  for (int i = 0; i < 30; ++i) {
    SceneLayout s;
    s.id = std::to_string(i);
    s.objects.push_back({BoundingBox::make(u(rng), u(rng), 0.1 * u(rng), 0.1 * u(rng)), labels.at("many"), {}});
    if (i < 3) s.objects.push_back({BoundingBox::make(u(rng), u(rng), 0.1, 0.1 * u(rng)), labels.at("few"), {}});
    if (i == 0) s.objects.push_back({BoundingBox::make(0.5, 0.5, 0.1, 0.1), labels.at("one"), {}});
    scenes.push_back(std::move(s));
  }
  FitOptions opt;
  opt.seed = 4;
  std::vector<CategoryFitSummary> summary;
  const auto models = fit_category_models(Corpus(labels, scenes), opt, 1, &summary);
  EXPECT_EQ(models.at("many").components(), 5u);
  EXPECT_EQ(models.at("few").components(), 3u);
  EXPECT_EQ(models.at("few").requested_components, 5u);
  EXPECT_FALSE(models.contains("one"));
  EXPECT_TRUE(summary[1].reduced);
  EXPECT_EQ(summary[2].components, 0u);

  // Worker count does not change results.
  const auto parallel = fit_category_models(Corpus(labels, scenes), opt, 3);
  EXPECT_EQ(serialize_models(parallel), serialize_models(models));
}

}  // namespace
}  // namespace glow
