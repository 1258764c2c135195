#include "glow/wordspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "glow/error.hpp"
#include "glow/ingestion.hpp"

namespace glow {

EmbeddingTable parse_embeddings(const std::string& text) {
  EmbeddingTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream row(line);
    std::string token;
    if (!(row >> token)) continue;
    WordVector v;
    double x;
    while (row >> x) v.push_back(x);
    if (!row.eof()) throw ParseError("embedding line " + std::to_string(line_no) + ": non-numeric value", line_no);
    // word2vec text files start with "<vocab> <dim>".
    if (line_no == 1 && v.size() == 1 && token.find_first_not_of("0123456789") == std::string::npos) continue;
    if (v.empty()) throw ParseError("embedding line " + std::to_string(line_no) + ": no values", line_no);
    if (dim == 0) dim = v.size();
    if (v.size() != dim) {
      throw ParseError("embedding line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                           " values, got " + std::to_string(v.size()),
                       line_no);
    }
    table.insert_or_assign(token, std::move(v));
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) { return parse_embeddings(read_text_file(path)); }

namespace {

std::vector<std::string> tokens_of(const std::string& name) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : name) {
    if (ch == ' ' || ch == '_' || ch == '-') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

const WordVector* lookup(const EmbeddingTable& embeddings, const std::string& token) {
  if (auto it = embeddings.find(token); it != embeddings.end()) return &it->second;
  std::string lower = token;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (auto it = embeddings.find(lower); it != embeddings.end()) return &it->second;
  return nullptr;
}

}  // namespace

WordVectorTable::WordVectorTable(const LabelSpace& labels, const EmbeddingTable& embeddings) {
  for (const auto& name : labels.names()) {
    const WordVector* whole = lookup(embeddings, name);
    WordVector v;
    if (whole) {
      v = *whole;
    } else {
      const auto tokens = tokens_of(name);
      if (tokens.empty()) throw ValidationError("category '" + name + "' has no tokens to embed");
      for (const auto& t : tokens) {
        const WordVector* tv = lookup(embeddings, t);
        if (!tv) throw ValidationError("no embedding for token '" + t + "' of category '" + name + "'");
        if (v.empty()) v.assign(tv->size(), 0.0);
        if (tv->size() != v.size()) throw ValidationError("embedding dimensions disagree for '" + name + "'");
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += (*tv)[i];
      }
      for (auto& x : v) x /= static_cast<double>(tokens.size());
    }
    if (dimension_ == 0) dimension_ = v.size();
    if (v.size() != dimension_) throw ValidationError("embedding dimensions disagree for '" + name + "'");
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) {
      throw ValidationError("zero embedding for category '" + name + "'");
    }
    vectors_.push_back(std::move(v));
  }
}

const WordVector& WordVectorTable::operator[](CategoryId c) const {
  if (c.value < 0 || static_cast<std::size_t>(c.value) >= vectors_.size()) {
    throw ValidationError("category index outside word vector table");
  }
  return vectors_[static_cast<std::size_t>(c.value)];
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("cosine_distance: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine_distance: zero-norm vector");
  const double cos = std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
  return 1.0 - cos;
}

double avg_distance(CategoryId candidate, const SceneLayout& scene, const WordVectorTable& table) {
  if (scene.objects.empty()) throw ValidationError("avg_distance: scene '" + scene.id + "' is empty");
  if (scene.contains(candidate)) throw ValidationError("avg_distance: candidate category is present in the scene");
  const auto& v = table[candidate];
  double sum = 0.0;
  for (const auto& obj : scene.objects) sum += cosine_distance(v, table[obj.category]);
  return sum / static_cast<double>(scene.objects.size());
}

Percentile percentile_from_int(int value) {
  switch (value) {
    case 5: return Percentile::P5;
    case 50: return Percentile::P50;
    case 95: return Percentile::P95;
    default: throw ValidationError("percentile must be one of 5, 50, 95 (got " + std::to_string(value) + ")");
  }
}

std::vector<RankedCandidate> rank_absent_categories(const SceneLayout& scene, const WordVectorTable& table) {
  std::vector<RankedCandidate> ranked;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const CategoryId c{static_cast<std::int32_t>(i)};
    if (!scene.contains(c)) ranked.push_back({c, avg_distance(c, scene, table)});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedCandidate& a, const RankedCandidate& b) { return a.distance > b.distance; });
  return ranked;
}

CategoryId rank_targets(const SceneLayout& scene, const WordVectorTable& table, Percentile percentile) {
  const auto ranked = rank_absent_categories(scene, table);
  if (ranked.empty()) throw ValidationError("scene '" + scene.id + "' contains every category; no target label");
  const auto k = static_cast<long>(ranked.size());
  // Integer ceil avoids 0.05 * 20 landing just above 1.
  long rank = (static_cast<long>(percentile) * k + 99) / 100;
  rank = std::clamp(rank, 1L, k);
  return ranked[static_cast<std::size_t>(rank - 1)].category;
}

}  // namespace glow
