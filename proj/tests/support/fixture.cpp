#include "support/fixture.hpp"

#include <random>
#include <sstream>

#include "glow/records.hpp"
#include "support/synthetic.hpp"

namespace glow::testing {

namespace {

std::string embedding_text(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::ostringstream out;
  out.precision(8);
  for (const char* token : {"kite", "bird", "traffic", "light", "person", "dog", "car", "boat", "bench"}) {
    out << token;
    for (int d = 0; d < 16; ++d) out << ' ' << n(rng);
    out << '\n';
  }
  return out.str();
}

}  // namespace

RunConfig write_fixture(const std::filesystem::path& dir, const FixtureSpec& spec) {
  std::filesystem::create_directories(dir);
  SyntheticWorld world(spec.seed);
  const auto corpus = world.make_corpus(spec.corpus_scenes);
  const std::size_t instances = spec.kind == RequestKind::R3 ? 2 : 1;
  const auto cases = derive_victim_cases(corpus, instances, spec.victims, spec.jitter, spec.seed + 1);

  PredictionSet predictions;
  std::vector<AttackRequest> requests;
  for (const auto& vc : cases) {
    predictions.scenes.push_back(vc.scene);
    AttackRequest r;
    r.scene_id = vc.scene.id;
    r.kind = spec.kind;
    r.count = instances;
    if (spec.explicit_targets) {
      r.target = vc.target;
    } else {
      r.percentile = Percentile::P50;
    }
    requests.push_back(r);
  }

  RunConfig cfg;
  cfg.corpus = dir / "corpus.json";
  cfg.predictions = dir / "predictions.jsonl";
  cfg.embeddings = dir / "vectors.txt";
  cfg.requests = dir / "requests.jsonl";
  cfg.models = dir / "models.txt";
  cfg.plans = dir / "plans.jsonl";
  cfg.attacked = dir / "attacked.jsonl";
  cfg.report = dir / "report.json";
  cfg.seed = spec.seed;
  cfg.request_kind = spec.kind;

  save_annotations(corpus, cfg.corpus);
  save_predictions(predictions, world.labels(), cfg.predictions);
  write_text_file(cfg.embeddings, embedding_text(spec.seed));
  save_requests(requests, world.labels(), cfg.requests);
  return cfg;
}

}  // namespace glow::testing
