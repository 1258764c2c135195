#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glow/ingestion.hpp"

namespace glow {

using Feature = Eigen::Vector4d;

Feature to_feature(const BoundingBox& box);
Feature to_feature(const BoxSample& sample);

struct GaussianComponent {
  double weight = 0.0;
  Feature mean = Feature::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();
};

/// Q-component full-covariance mixture over (cx, cy, w, h) for one category.
///
/// `weighted_density` keeps the 1/Q factor of the layout prior, so it is the
/// ordinary mixture density scaled down by the component count. The scale
/// never changes which box has the highest density.
class CategoryGMM {
 public:
  CategoryGMM() = default;
  // Validates weights (sum to 1 within 1e-9) and factorizes each covariance.
  CategoryGMM(std::string category, std::vector<GaussianComponent> components);

  const std::string& category() const noexcept { return category_; }
  std::size_t components() const noexcept { return components_.size(); }
  const std::vector<GaussianComponent>& parameters() const noexcept { return components_; }

  double component_log_pdf(std::size_t q, const Feature& x) const;
  double mixture_density(const Feature& x) const;
  double weighted_density(const Feature& x) const { return mixture_density(x) / static_cast<double>(components()); }
  double weighted_density(const BoundingBox& box) const { return weighted_density(to_feature(box)); }
  double log_likelihood(std::span<const Feature> samples) const;

  // Fit metadata, carried through the model file.
  std::size_t requested_components = 0;
  std::size_t sample_count = 0;
  double final_log_likelihood = 0.0;

 private:
  std::string category_;
  std::vector<GaussianComponent> components_;
  std::vector<Eigen::Matrix4d> chol_;  // lower factors
  std::vector<double> log_norm_;       // -0.5 * (4 log 2pi + log det)
};

struct FitOptions {
  std::size_t components = 5;
  std::uint64_t seed = 0;
  double regularization = 1e-6;
  double tolerance = 1e-6;
  int max_iterations = 200;
};

struct GmmFit {
  CategoryGMM model;
  std::vector<double> log_likelihood;  // one entry per E-step
  int iterations = 0;
  bool converged = false;
};

// EM with k-means++ seeded means. Throws ValidationError when fewer than two
// samples are given or when samples < components (lower Q in that case).
GmmFit fit_gmm(std::span<const Feature> samples, const FitOptions& options, std::string category = {});

using ModelSet = std::map<std::string, CategoryGMM>;

struct CategoryFitSummary {
  std::string category;
  std::size_t samples = 0;
  std::size_t components = 0;  // 0 when the category was skipped
  double log_likelihood = 0.0;
  bool reduced = false;
  std::string note;
};

// Fits every category with at least two samples. Categories with fewer than
// `options.components` samples fall back to Q' = sample count. Each category
// draws its own seed from (options.seed, category name).
ModelSet fit_category_models(const Corpus& corpus, const FitOptions& options, unsigned workers,
                             std::vector<CategoryFitSummary>* summary = nullptr);

void save_models(const ModelSet& models, const std::filesystem::path& path);
std::string serialize_models(const ModelSet& models);
ModelSet load_models(const std::filesystem::path& path);
ModelSet parse_models(const std::string& text);

}  // namespace glow
