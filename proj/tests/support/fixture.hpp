#pragma once

// On-disk inputs for the batch commands: a synthetic COCO corpus, a victim
// prediction dump, word vectors and an R2/R3 request file.

#include <cstdint>
#include <filesystem>

#include "glow/pipeline.hpp"

namespace glow::testing {

struct FixtureSpec {
  std::uint64_t seed = 1;
  std::size_t corpus_scenes = 600;
  std::size_t victims = 40;
  RequestKind kind = RequestKind::R2;
  bool explicit_targets = true;  // otherwise requests carry a percentile only
  double jitter = 0.01;
};

// Writes corpus.json, predictions.jsonl, vectors.txt and requests.jsonl under
// `dir` and returns a RunConfig pointing at them, with outputs under `dir` too.
RunConfig write_fixture(const std::filesystem::path& dir, const FixtureSpec& spec);

}  // namespace glow::testing
