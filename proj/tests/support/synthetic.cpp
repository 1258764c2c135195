#include "support/synthetic.hpp"

#include <algorithm>
#include <map>

namespace glow::testing {

SyntheticWorld::SyntheticWorld(std::uint64_t seed) : rng_(seed) {
  shapes_ = {
      {"kite", 0.5, 0.12, 0.12, 0.03, 0.08, 0.02, 0.08, 0.02},
      {"bird", 0.5, 0.12, 0.22, 0.03, 0.05, 0.015, 0.05, 0.015},
      {"traffic light", 0.5, 0.12, 0.33, 0.03, 0.04, 0.01, 0.12, 0.02},
      {"person", 0.5, 0.12, 0.50, 0.03, 0.12, 0.02, 0.35, 0.03},
      {"dog", 0.5, 0.12, 0.62, 0.03, 0.20, 0.03, 0.15, 0.02},
      {"car", 0.5, 0.12, 0.74, 0.03, 0.30, 0.03, 0.14, 0.02},
      {"boat", 0.5, 0.12, 0.82, 0.03, 0.25, 0.03, 0.10, 0.02},
      {"bench", 0.5, 0.12, 0.90, 0.02, 0.22, 0.03, 0.07, 0.015},
  };
  for (std::size_t i = 0; i < shapes_.size(); ++i) labels_.add(shapes_[i].name, static_cast<std::int64_t>(i) + 1);
}

BoundingBox SyntheticWorld::sample_box(CategoryId c) {
  const auto& s = shapes_[static_cast<std::size_t>(c.value)];
  std::normal_distribution<double> n(0.0, 1.0);
  const double cx = s.cx_mean + s.cx_sd * n(rng_);
  const double cy = s.cy_mean + s.cy_sd * n(rng_);
  const double w = s.w_mean + s.w_sd * n(rng_);
  const double h = s.h_mean + s.h_sd * n(rng_);
  return BoundingBox::clamped(cx, cy, w, h, 0.005);
}

SceneLayout SyntheticWorld::sample_scene(const std::string& id, std::size_t objects, std::size_t max_per_category) {
  SceneLayout scene;
  scene.id = id;
  scene.width = 640;
  scene.height = 480;
  std::uniform_int_distribution<std::int32_t> pick(0, static_cast<std::int32_t>(shapes_.size()) - 1);
  while (scene.objects.size() < objects) {
    const CategoryId c{pick(rng_)};
    if (scene.count(c) >= max_per_category) continue;
    scene.objects.push_back({sample_box(c), c, std::nullopt});
  }
  return scene;
}

Corpus SyntheticWorld::make_corpus(std::size_t scenes, const std::string& id_prefix) {
  std::vector<SceneLayout> out;
  std::uniform_int_distribution<std::size_t> count(3, 6);
  for (std::size_t t = 0; t < scenes; ++t) {
    out.push_back(sample_scene(id_prefix + std::to_string(t + 1), count(rng_)));
  }
  return Corpus(labels_, std::move(out));
}

std::vector<VictimCase> derive_victim_cases(const Corpus& corpus, std::size_t instances, std::size_t limit,
                                            double jitter, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto c_total = static_cast<std::int32_t>(corpus.labels().size());
  std::uniform_int_distribution<std::int32_t> pick(0, c_total - 1);
  std::vector<VictimCase> cases;
  for (std::size_t t = 0; t < corpus.size() && cases.size() < limit; ++t) {
    const auto& src = corpus.scenes()[t];
    std::vector<CategoryId> eligible;
    for (std::int32_t c = 0; c < c_total; ++c) {
      if (src.count(CategoryId{c}) == instances) eligible.push_back(CategoryId{c});
    }
    if (eligible.empty()) continue;
    const CategoryId target = eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)];

    VictimCase vc;
    vc.target = target;
    vc.source = t;
    vc.scene.id = "victim-" + src.id;
    vc.scene.width = src.width;
    vc.scene.height = src.height;
    for (std::size_t i = 0; i < src.objects.size(); ++i) {
      const auto& o = src.objects[i];
      CategoryId label = o.category;
      if (label == target) {
        vc.planted.push_back(i);
        do label = CategoryId{pick(rng)};
        while (label == target);
      }
      const auto b = o.box;
      const auto box = jitter > 0.0 ? BoundingBox::clamped(b.cx() + jitter * noise(rng), b.cy() + jitter * noise(rng),
                                                           b.w() + jitter * noise(rng), b.h() + jitter * noise(rng),
                                                           0.005)
                                    : b;
      vc.scene.objects.push_back(prediction(box, label));
    }
    cases.push_back(std::move(vc));
  }
  return cases;
}

LabeledBox prediction(const BoundingBox& box, CategoryId c, double confidence) { return {box, c, confidence}; }

}  // namespace glow::testing
