#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "glow/scene.hpp"

namespace glow {

struct ObjectRef {
  std::size_t scene;
  std::size_t object;
};

/// Annotated scenes over one label space, with a per-category index of
/// every annotation. Immutable once built.
class Corpus {
 public:
  Corpus() = default;
  // Throws ValidationError if a scene references a category outside `labels`.
  Corpus(LabelSpace labels, std::vector<SceneLayout> scenes);

  const LabelSpace& labels() const noexcept { return labels_; }
  const std::vector<SceneLayout>& scenes() const noexcept { return scenes_; }
  std::size_t size() const noexcept { return scenes_.size(); }
  const std::vector<ObjectRef>& instances(CategoryId c) const;
  std::size_t annotation_count() const noexcept { return annotation_count_; }

  // Bookkeeping from load_annotations.
  std::size_t skipped_crowd = 0;
  std::size_t skipped_degenerate = 0;

 private:
  LabelSpace labels_;
  std::vector<SceneLayout> scenes_;
  std::vector<std::vector<ObjectRef>> by_category_;
  std::size_t annotation_count_ = 0;
};

/// Symmetric C x C same-scene counts. Off-diagonal (i, j) counts scenes that
/// contain both categories; the diagonal counts scenes holding at least two
/// instances of the category.
class CooccurrenceMatrix {
 public:
  explicit CooccurrenceMatrix(std::size_t categories = 0)
      : size_(categories), counts_(categories * categories, 0) {}

  std::size_t size() const noexcept { return size_; }
  std::uint64_t at(CategoryId a, CategoryId b) const;
  void increment(CategoryId a, CategoryId b);

 private:
  std::size_t size_;
  std::vector<std::uint64_t> counts_;
};

using BoxSample = std::array<double, 4>;

// COCO instances file -> corpus. Crowd annotations and zero-extent boxes are
// skipped (and counted on the corpus).
Corpus load_annotations(const std::filesystem::path& path);
Corpus parse_annotations(const std::string& text);
void save_annotations(const Corpus& corpus, const std::filesystem::path& path);

struct PredictionSet {
  nlohmann::json header;  // empty object when the file carried no header
  std::vector<SceneLayout> scenes;
};

// Line-delimited prediction dump; see README for the record layout.
PredictionSet load_predictions(const std::filesystem::path& path, const LabelSpace& labels);
PredictionSet parse_predictions(const std::string& text, const LabelSpace& labels);
void save_predictions(const PredictionSet& predictions, const LabelSpace& labels,
                      const std::filesystem::path& path);

std::vector<BoxSample> category_samples(const Corpus& corpus, CategoryId c);
CooccurrenceMatrix build_cooccurrence(const Corpus& corpus);

// Shared helpers for the line-delimited record formats.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::vector<nlohmann::json> parse_json_lines(const std::string& text);

}  // namespace glow
