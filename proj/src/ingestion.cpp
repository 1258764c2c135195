#include "glow/ingestion.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "glow/error.hpp"

namespace glow {

using nlohmann::json;

Corpus::Corpus(LabelSpace labels, std::vector<SceneLayout> scenes)
    : labels_(std::move(labels)), scenes_(std::move(scenes)), by_category_(labels_.size()) {
  for (std::size_t s = 0; s < scenes_.size(); ++s) {
    const auto& objects = scenes_[s].objects;
    for (std::size_t o = 0; o < objects.size(); ++o) {
      const auto c = objects[o].category.value;
      if (c < 0 || static_cast<std::size_t>(c) >= labels_.size()) {
        throw ValidationError("scene '" + scenes_[s].id + "' references category index " +
                              std::to_string(c) + " outside the label space");
      }
      by_category_[static_cast<std::size_t>(c)].push_back({s, o});
      ++annotation_count_;
    }
  }
}

const std::vector<ObjectRef>& Corpus::instances(CategoryId c) const {
  labels_.name(c);
  return by_category_[static_cast<std::size_t>(c.value)];
}

std::uint64_t CooccurrenceMatrix::at(CategoryId a, CategoryId b) const {
  if (a.value < 0 || b.value < 0 || static_cast<std::size_t>(a.value) >= size_ ||
      static_cast<std::size_t>(b.value) >= size_) {
    throw ValidationError("co-occurrence index out of range");
  }
  return counts_[static_cast<std::size_t>(a.value) * size_ + static_cast<std::size_t>(b.value)];
}

void CooccurrenceMatrix::increment(CategoryId a, CategoryId b) {
  at(a, b);
  const auto i = static_cast<std::size_t>(a.value);
  const auto j = static_cast<std::size_t>(b.value);
  ++counts_[i * size_ + j];
  if (i != j) ++counts_[j * size_ + i];
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

namespace {

std::size_t line_of(const std::string& text, std::size_t byte) {
  const auto end = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON at line " + std::to_string(line_of(text, e.byte)) + ", byte " +
                         std::to_string(e.byte) + ": " + e.what(),
                     line_of(text, e.byte), e.byte);
  }
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

std::vector<json> parse_json_lines(const std::string& text) {
  std::vector<json> records;
  std::size_t line = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line;
    const std::string_view row(text.data() + start, end - start);
    if (row.find_first_not_of(" \t\r") != std::string_view::npos) {
      try {
        records.push_back(json::parse(row));
      } catch (const json::parse_error& e) {
        throw ParseError("malformed record at line " + std::to_string(line) + ", byte " +
                             std::to_string(start + e.byte) + ": " + e.what(),
                         line, start + e.byte);
      }
    }
    start = end + 1;
  }
  return records;
}

Corpus parse_annotations(const std::string& text) {
  const json doc = parse_document(text);
  if (!doc.is_object()) throw ParseError("annotation file must be a JSON object", 1, 0);

  LabelSpace labels;
  for (const auto& cat : doc.value("categories", json::array())) {
    labels.add(field<std::string>(cat, "name", "category"), field<std::int64_t>(cat, "id", "category"));
  }

  std::vector<SceneLayout> scenes;
  std::unordered_map<std::int64_t, std::size_t> scene_index;
  for (const auto& img : doc.value("images", json::array())) {
    const auto id = field<std::int64_t>(img, "id", "image");
    SceneLayout scene;
    scene.id = std::to_string(id);
    scene.width = field<double>(img, "width", "image " + scene.id);
    scene.height = field<double>(img, "height", "image " + scene.id);
    if (!(scene.width > 0.0) || !(scene.height > 0.0)) {
      throw ValidationError("image " + scene.id + ": non-positive dimensions");
    }
    if (!scene_index.emplace(id, scenes.size()).second) {
      throw ValidationError("duplicate image id " + scene.id);
    }
    scenes.push_back(std::move(scene));
  }

  std::size_t crowd = 0;
  std::size_t degenerate = 0;
  for (const auto& ann : doc.value("annotations", json::array())) {
    const std::string where = "annotation " + (ann.contains("id") ? ann["id"].dump() : std::string("?"));
    const auto image_id = field<std::int64_t>(ann, "image_id", where);
    const auto category_id = field<std::int64_t>(ann, "category_id", where);
    const auto bbox = field<std::vector<double>>(ann, "bbox", where);
    if (bbox.size() != 4) throw ValidationError(where + ": bbox must have 4 entries");

    auto scene_it = scene_index.find(image_id);
    if (scene_it == scene_index.end()) {
      throw ValidationError(where + ": unknown image id " + std::to_string(image_id));
    }
    auto category = labels.find_external(category_id);
    if (!category) throw ValidationError(where + ": unknown category id " + std::to_string(category_id));

    if (ann.value("iscrowd", 0) != 0) {
      ++crowd;
      continue;
    }
    if (!(bbox[2] > 0.0) || !(bbox[3] > 0.0)) {
      ++degenerate;
      continue;
    }
    auto& scene = scenes[scene_it->second];
    const double cx = (bbox[0] + 0.5 * bbox[2]) / scene.width;
    const double cy = (bbox[1] + 0.5 * bbox[3]) / scene.height;
    scene.objects.push_back(
        {BoundingBox::clamped(cx, cy, bbox[2] / scene.width, bbox[3] / scene.height), *category, std::nullopt});
  }

  Corpus corpus(std::move(labels), std::move(scenes));
  corpus.skipped_crowd = crowd;
  corpus.skipped_degenerate = degenerate;
  return corpus;
}

Corpus load_annotations(const std::filesystem::path& path) { return parse_annotations(read_text_file(path)); }

void save_annotations(const Corpus& corpus, const std::filesystem::path& path) {
  const auto& labels = corpus.labels();
  json categories = json::array();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const CategoryId c{static_cast<std::int32_t>(i)};
    categories.push_back({{"id", labels.external_id(c).value_or(static_cast<std::int64_t>(i) + 1)},
                          {"name", labels.name(c)}});
  }
  json images = json::array();
  json annotations = json::array();
  std::int64_t next_annotation = 1;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& scene = corpus.scenes()[s];
    std::int64_t image_id = static_cast<std::int64_t>(s) + 1;
    try {
      image_id = std::stoll(scene.id);
    } catch (const std::exception&) {
    }
    images.push_back({{"id", image_id}, {"width", scene.width}, {"height", scene.height}});
    for (const auto& obj : scene.objects) {
      const PixelBox px = denormalize(obj.box, scene.width, scene.height);
      annotations.push_back({{"id", next_annotation++},
                             {"image_id", image_id},
                             {"category_id", labels.external_id(obj.category).value_or(obj.category.value + 1)},
                             {"bbox", {px.x, px.y, px.w, px.h}},
                             {"area", px.w * px.h},
                             {"iscrowd", 0}});
    }
  }
  const json doc = {{"images", images}, {"annotations", annotations}, {"categories", categories}};
  write_text_file(path, doc.dump() + "\n");
}

PredictionSet parse_predictions(const std::string& text, const LabelSpace& labels) {
  PredictionSet out;
  out.header = json::object();
  std::set<std::string> seen;
  std::size_t record_no = 0;
  for (const auto& rec : parse_json_lines(text)) {
    ++record_no;
    if (rec.contains("format")) {
      if (record_no != 1) throw ValidationError("prediction header must be the first record");
      if (rec["format"] != "glow-predictions") throw ValidationError("not a glow prediction dump");
      out.header = rec;
      continue;
    }
    const std::string where = "prediction record " + std::to_string(record_no);
    SceneLayout scene;
    scene.id = field<std::string>(rec, "scene_id", where);
    scene.width = rec.value("width", 1.0);
    scene.height = rec.value("height", 1.0);
    if (!seen.insert(scene.id).second) throw ValidationError(where + ": duplicate scene id '" + scene.id + "'");
    for (const auto& obj : rec.value("objects", json::array())) {
      const auto name = field<std::string>(obj, "category", where);
      auto category = labels.find(name);
      if (!category) throw ValidationError(where + ": category '" + name + "' outside the label space");
      if (!obj.contains("confidence")) throw ValidationError(where + ": object without confidence");
      const auto conf = field<double>(obj, "confidence", where);
      if (!(conf >= 0.0 && conf <= 1.0)) throw ValidationError(where + ": confidence outside [0,1]");
      scene.objects.push_back({BoundingBox::make(field<double>(obj, "cx", where), field<double>(obj, "cy", where),
                                                 field<double>(obj, "w", where), field<double>(obj, "h", where)),
                               *category, conf});
    }
    out.scenes.push_back(std::move(scene));
  }
  return out;
}

PredictionSet load_predictions(const std::filesystem::path& path, const LabelSpace& labels) {
  return parse_predictions(read_text_file(path), labels);
}

void save_predictions(const PredictionSet& predictions, const LabelSpace& labels,
                      const std::filesystem::path& path) {
  std::string text;
  if (!predictions.header.empty()) {
    json header = predictions.header;
    header["format"] = "glow-predictions";
    text += header.dump() + "\n";
  }
  for (const auto& scene : predictions.scenes) {
    json objects = json::array();
    for (const auto& obj : scene.objects) {
      objects.push_back({{"category", labels.name(obj.category)},
                         {"cx", obj.box.cx()},
                         {"cy", obj.box.cy()},
                         {"w", obj.box.w()},
                         {"h", obj.box.h()},
                         {"confidence", obj.confidence.value_or(1.0)}});
    }
    const json rec = {{"scene_id", scene.id}, {"width", scene.width}, {"height", scene.height}, {"objects", objects}};
    text += rec.dump() + "\n";
  }
  write_text_file(path, text);
}

std::vector<BoxSample> category_samples(const Corpus& corpus, CategoryId c) {
  std::vector<BoxSample> out;
  for (const auto& ref : corpus.instances(c)) {
    out.push_back(corpus.scenes()[ref.scene].objects[ref.object].box.as_array());
  }
  return out;
}

CooccurrenceMatrix build_cooccurrence(const Corpus& corpus) {
  const std::size_t n = corpus.labels().size();
  CooccurrenceMatrix matrix(n);
  std::vector<std::size_t> counts(n);
  for (const auto& scene : corpus.scenes()) {
    std::fill(counts.begin(), counts.end(), 0);
    for (const auto& obj : scene.objects) ++counts[static_cast<std::size_t>(obj.category.value)];
    for (std::size_t i = 0; i < n; ++i) {
      if (counts[i] == 0) continue;
      const CategoryId ci{static_cast<std::int32_t>(i)};
      if (counts[i] >= 2) matrix.increment(ci, ci);
      for (std::size_t j = i + 1; j < n; ++j) {
        if (counts[j] > 0) matrix.increment(ci, CategoryId{static_cast<std::int32_t>(j)});
      }
    }
  }
  return matrix;
}

}  // namespace glow
