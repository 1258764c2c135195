#include "glow/location_model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "glow/error.hpp"
#include "glow/seeding.hpp"

namespace glow {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2 pi)
constexpr const char* kModelMagic = "glow-location-models";
constexpr int kModelVersion = 1;

double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

Feature to_feature(const BoundingBox& box) { return {box.cx(), box.cy(), box.w(), box.h()}; }
Feature to_feature(const BoxSample& s) { return {s[0], s[1], s[2], s[3]}; }

CategoryGMM::CategoryGMM(std::string category, std::vector<GaussianComponent> components)
    : category_(std::move(category)), components_(std::move(components)) {
  if (components_.empty()) throw ValidationError("mixture for '" + category_ + "' has no components");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0)) throw ValidationError("negative mixture weight for '" + category_ + "'");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("mixture weights for '" + category_ + "' do not sum to 1");
  for (const auto& c : components_) {
    Eigen::LLT<Eigen::Matrix4d> llt(c.covariance);
    if (llt.info() != Eigen::Success) {
      throw ValidationError("covariance for '" + category_ + "' is not positive definite");
    }
    Eigen::Matrix4d l = llt.matrixL();
    double log_det = 0.0;
    for (int i = 0; i < 4; ++i) log_det += 2.0 * std::log(l(i, i));
    chol_.push_back(l);
    log_norm_.push_back(-0.5 * (4.0 * kLog2Pi + log_det));
  }
  requested_components = components_.size();
}

double CategoryGMM::component_log_pdf(std::size_t q, const Feature& x) const {
  const Feature z = chol_[q].triangularView<Eigen::Lower>().solve(x - components_[q].mean);
  return log_norm_[q] - 0.5 * z.squaredNorm();
}

double CategoryGMM::mixture_density(const Feature& x) const {
  double sum = 0.0;
  for (std::size_t q = 0; q < components_.size(); ++q) {
    sum += components_[q].weight * std::exp(component_log_pdf(q, x));
  }
  return sum;
}

double CategoryGMM::log_likelihood(std::span<const Feature> samples) const {
  std::vector<double> terms(components_.size());
  double ll = 0.0;
  for (const auto& x : samples) {
    for (std::size_t q = 0; q < components_.size(); ++q) {
      terms[q] = std::log(components_[q].weight) + component_log_pdf(q, x);
    }
    ll += log_sum_exp(terms);
  }
  return ll;
}

namespace {

std::vector<Feature> kmeanspp_centers(std::span<const Feature> samples, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = samples.size();
  std::vector<Feature> centers;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  centers.push_back(samples[pick(rng)]);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (samples[i] - centers.back()).squaredNorm());
      total += d2[i];
    }
    std::size_t chosen = 0;
    if (total > 0.0) {
      double target = unit(rng) * total;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        target -= d2[i];
        if (target < 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers.push_back(samples[chosen]);
  }
  return centers;
}

}  // namespace

GmmFit fit_gmm(std::span<const Feature> samples, const FitOptions& options, std::string category) {
  const std::size_t n = samples.size();
  const std::size_t k = options.components;
  if (n < 2) throw ValidationError("GMM fit needs at least 2 samples (got " + std::to_string(n) + ")");
  if (k == 0) throw ValidationError("GMM fit needs at least one component");
  if (n < k) {
    throw ValidationError("GMM fit has " + std::to_string(n) + " samples for " + std::to_string(k) +
                          " components; lower the component count");
  }
  const Eigen::Matrix4d floor = options.regularization * Eigen::Matrix4d::Identity();

  std::mt19937_64 rng(options.seed);
  const auto centers = kmeanspp_centers(samples, k, rng);

  Feature global_mean = Feature::Zero();
  for (const auto& x : samples) global_mean += x;
  global_mean /= static_cast<double>(n);
  Eigen::Matrix4d global_cov = Eigen::Matrix4d::Zero();
  for (const auto& x : samples) global_cov += (x - global_mean) * (x - global_mean).transpose();
  global_cov = global_cov / static_cast<double>(n) + floor;

  std::vector<GaussianComponent> params(k);
  for (std::size_t q = 0; q < k; ++q) params[q] = {1.0 / static_cast<double>(k), centers[q], global_cov};

  GmmFit fit;
  Eigen::MatrixXd resp(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  std::vector<double> terms(k);

  for (int iter = 0;; ++iter) {
    // Weights may drift off 1 by rounding; renormalize before validation.
    double wsum = 0.0;
    for (const auto& p : params) wsum += p.weight;
    for (auto& p : params) p.weight /= wsum;
    fit.model = CategoryGMM(category, params);

    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t q = 0; q < k; ++q) {
        terms[q] = std::log(params[q].weight) + fit.model.component_log_pdf(q, samples[i]);
      }
      const double lse = log_sum_exp(terms);
      ll += lse;
      for (std::size_t q = 0; q < k; ++q) {
        resp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q)) = std::exp(terms[q] - lse);
      }
    }
    fit.log_likelihood.push_back(ll);
    fit.iterations = iter;

    const auto steps = fit.log_likelihood.size();
    if (steps >= 2 && fit.log_likelihood[steps - 1] - fit.log_likelihood[steps - 2] < options.tolerance) {
      fit.converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;

    for (std::size_t q = 0; q < k; ++q) {
      const auto col = resp.col(static_cast<Eigen::Index>(q));
      const double nk = col.sum();
      if (nk <= std::numeric_limits<double>::min()) {
        params[q].weight = 0.0;  // collapsed; keep the old mean/covariance
        continue;
      }
      Feature mean = Feature::Zero();
      for (std::size_t i = 0; i < n; ++i) mean += col(static_cast<Eigen::Index>(i)) * samples[i];
      mean /= nk;
      Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
      for (std::size_t i = 0; i < n; ++i) {
        const Feature d = samples[i] - mean;
        cov += col(static_cast<Eigen::Index>(i)) * (d * d.transpose());
      }
      cov = cov / nk + floor;
      params[q] = {nk / static_cast<double>(n), mean, 0.5 * (cov + cov.transpose())};
    }
  }

  fit.model.requested_components = k;
  fit.model.sample_count = n;
  fit.model.final_log_likelihood = fit.log_likelihood.back();
  return fit;
}

ModelSet fit_category_models(const Corpus& corpus, const FitOptions& options, unsigned workers,
                             std::vector<CategoryFitSummary>* summary) {
  const auto& labels = corpus.labels();
  const std::size_t c = labels.size();
  std::vector<std::optional<CategoryGMM>> fitted(c);
  std::vector<CategoryFitSummary> rows(c);

  auto fit_one = [&](std::size_t i) {
    const CategoryId id{static_cast<std::int32_t>(i)};
    const auto raw = category_samples(corpus, id);
    std::vector<Feature> samples;
    samples.reserve(raw.size());
    for (const auto& s : raw) samples.push_back(to_feature(s));
    auto& row = rows[i];
    row.category = labels.name(id);
    row.samples = samples.size();
    if (samples.size() < 2) {
      row.note = "skipped: fewer than 2 samples";
      return;
    }
    FitOptions local = options;
    local.seed = derive_seed(options.seed, row.category);
    if (samples.size() < options.components) {
      local.components = samples.size();
      row.reduced = true;
      row.note = "reduced to " + std::to_string(local.components) + " components";
    }
    auto fit = fit_gmm(samples, local, row.category);
    fit.model.requested_components = options.components;
    row.components = fit.model.components();
    row.log_likelihood = fit.model.final_log_likelihood;
    fitted[i] = std::move(fit.model);
  };

  const unsigned pool = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(c, 1))));
  if (pool <= 1) {
    for (std::size_t i = 0; i < c; ++i) fit_one(i);
  } else {
    std::vector<std::jthread> threads;
    for (unsigned t = 0; t < pool; ++t) {
      threads.emplace_back([&, t] {
        for (std::size_t i = t; i < c; i += pool) fit_one(i);
      });
    }
  }

  ModelSet models;
  for (std::size_t i = 0; i < c; ++i) {
    if (fitted[i]) models.emplace(rows[i].category, std::move(*fitted[i]));
  }
  if (summary) *summary = std::move(rows);
  return models;
}

std::string serialize_models(const ModelSet& models) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "models " << models.size() << '\n';
  for (const auto& [name, model] : models) {
    out << "category " << std::quoted(name) << " components " << model.components() << " requested "
        << model.requested_components << " samples " << model.sample_count << " loglik "
        << model.final_log_likelihood << '\n';
    for (const auto& c : model.parameters()) {
      out << "weight " << c.weight << " mean";
      for (int i = 0; i < 4; ++i) out << ' ' << c.mean(i);
      out << " cov";
      for (int r = 0; r < 4; ++r)
        for (int col = 0; col < 4; ++col) out << ' ' << c.covariance(r, col);
      out << '\n';
    }
  }
  out << "end\n";
  return out.str();
}

void save_models(const ModelSet& models, const std::filesystem::path& path) {
  write_text_file(path, serialize_models(models));
}

namespace {

void expect(std::istream& in, const std::string& keyword) {
  std::string word;
  if (!(in >> word)) throw ParseError("model file truncated: expected '" + keyword + "'");
  if (word != keyword) throw ParseError("model file: expected '" + keyword + "', found '" + word + "'");
}

template <typename T>
T read_value(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw ParseError(std::string("model file truncated or malformed while reading ") + what);
  return v;
}

}  // namespace

ModelSet parse_models(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  if (!(in >> magic) || magic != kModelMagic) throw ParseError("not a location model file");
  const int version = read_value<int>(in, "version");
  if (version != kModelVersion) {
    throw ParseError("model file version " + std::to_string(version) + " unsupported (expected " +
                     std::to_string(kModelVersion) + ")");
  }
  expect(in, "models");
  const auto count = read_value<std::size_t>(in, "model count");
  ModelSet models;
  for (std::size_t m = 0; m < count; ++m) {
    expect(in, "category");
    std::string name;
    if (!(in >> std::quoted(name))) throw ParseError("model file truncated while reading category name");
    expect(in, "components");
    const auto q = read_value<std::size_t>(in, "component count");
    expect(in, "requested");
    const auto requested = read_value<std::size_t>(in, "requested count");
    expect(in, "samples");
    const auto samples = read_value<std::size_t>(in, "sample count");
    expect(in, "loglik");
    const auto ll = read_value<double>(in, "log-likelihood");
    std::vector<GaussianComponent> comps(q);
    for (auto& c : comps) {
      expect(in, "weight");
      c.weight = read_value<double>(in, "weight");
      expect(in, "mean");
      for (int i = 0; i < 4; ++i) c.mean(i) = read_value<double>(in, "mean");
      expect(in, "cov");
      for (int r = 0; r < 4; ++r)
        for (int col = 0; col < 4; ++col) c.covariance(r, col) = read_value<double>(in, "covariance");
    }
    CategoryGMM model(name, std::move(comps));
    model.requested_components = requested;
    model.sample_count = samples;
    model.final_log_likelihood = ll;
    models.emplace(name, std::move(model));
  }
  expect(in, "end");
  return models;
}

ModelSet load_models(const std::filesystem::path& path) { return parse_models(read_text_file(path)); }

}  // namespace glow
