#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "glow/scene.hpp"

namespace glow {

using WordVector = std::vector<double>;

// Token -> vector, as read from a plain-text embedding file.
using EmbeddingTable = std::unordered_map<std::string, WordVector>;

EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable parse_embeddings(const std::string& text);

/// One vector per label-space category, all of the same dimension and none
/// zero. Multi-word names ("traffic light", "hair_drier") embed as the mean
/// of their token vectors.
class WordVectorTable {
 public:
  WordVectorTable(const LabelSpace& labels, const EmbeddingTable& embeddings);

  const WordVector& operator[](CategoryId c) const;
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return vectors_.size(); }

 private:
  std::vector<WordVector> vectors_;
  std::size_t dimension_ = 0;
};

// 1 - cos(a, b). Throws ValidationError on a zero vector or dimension mismatch.
double cosine_distance(std::span<const double> a, std::span<const double> b);

// Mean cosine distance from `candidate` to every object instance in `scene`.
double avg_distance(CategoryId candidate, const SceneLayout& scene, const WordVectorTable& table);

enum class Percentile { P5 = 5, P50 = 50, P95 = 95 };

// Throws ValidationError for anything other than 5, 50 or 95.
Percentile percentile_from_int(int value);

struct RankedCandidate {
  CategoryId category;
  double distance;
};

// Categories absent from the scene, farthest first; ties go to the lower index.
std::vector<RankedCandidate> rank_absent_categories(const SceneLayout& scene, const WordVectorTable& table);

// Picks the target at rank ceil(p/100 * K) of the farthest-first ordering, so
// P5 is a distant (hard) label and P95 a close one.
CategoryId rank_targets(const SceneLayout& scene, const WordVectorTable& table, Percentile percentile);

}  // namespace glow
