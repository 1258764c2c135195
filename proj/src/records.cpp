#include "glow/records.hpp"

#include <cstdio>
#include <sstream>

#include "glow/error.hpp"
#include "glow/ingestion.hpp"

namespace glow {

using nlohmann::json;

namespace {

json box_json(const BoundingBox& b) { return {{"cx", b.cx()}, {"cy", b.cy()}, {"w", b.w()}, {"h", b.h()}}; }

BoundingBox box_from(const json& j) {
  return BoundingBox::make(j.at("cx").get<double>(), j.at("cy").get<double>(), j.at("w").get<double>(),
                           j.at("h").get<double>());
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_from(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace

json request_to_json(const AttackRequest& r, const LabelSpace& labels) {
  json j = {{"scene_id", r.scene_id}, {"kind", to_string(r.kind)}, {"count", r.count}};
  if (r.target) j["target"] = labels.name(*r.target);
  if (r.percentile) j["percentile"] = static_cast<int>(*r.percentile);
  if (r.victim_index) j["victim_index"] = *r.victim_index;
  return j;
}

AttackRequest request_from_json(const json& j, const LabelSpace& labels) {
  try {
    AttackRequest r;
    r.scene_id = j.at("scene_id").get<std::string>();
    r.kind = request_kind_from_string(j.at("kind").get<std::string>());
    r.count = j.value("count", r.kind == RequestKind::R3 ? std::size_t{2} : std::size_t{1});
    if (j.contains("target") && !j["target"].is_null()) r.target = labels.at(j["target"].get<std::string>());
    if (j.contains("percentile") && !j["percentile"].is_null()) {
      r.percentile = percentile_from_int(j["percentile"].get<int>());
    }
    if (j.contains("victim_index") && !j["victim_index"].is_null()) {
      r.victim_index = j["victim_index"].get<std::size_t>();
    }
    if (!r.target && !r.percentile) throw ValidationError("request needs a target or a percentile");
    r.validate();
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed request record: ") + e.what());
  }
}

std::vector<AttackRequest> load_requests(const std::filesystem::path& path, const LabelSpace& labels) {
  std::vector<AttackRequest> out;
  for (const auto& j : parse_json_lines(read_text_file(path))) out.push_back(request_from_json(j, labels));
  return out;
}

void save_requests(const std::vector<AttackRequest>& requests, const LabelSpace& labels,
                   const std::filesystem::path& path) {
  std::string text;
  for (const auto& r : requests) text += request_to_json(r, labels).dump() + "\n";
  write_text_file(path, text);
}

json plan_to_json(const PlanRecord& rec, const LabelSpace& labels) {
  json j;
  j["scene_id"] = rec.request.scene_id;
  j["request"] = request_to_json(rec.request, labels);
  j["width"] = rec.width;
  j["height"] = rec.height;
  j["config"] = rec.config;
  if (!rec.plan) {
    j["status"] = "failed";
    j["error"] = rec.error;
    return j;
  }
  const auto& plan = *rec.plan;
  j["status"] = "ok";
  j["generator"] = plan.generator;
  j["r1_fallback"] = rec.r1_fallback;
  json victims = json::array();
  for (const auto& v : plan.victims.victims) {
    victims.push_back({{"object", v.object}, {"target", labels.name(v.target)}, {"box", box_json(v.box)}});
  }
  j["victims"] = victims;
  json objects = json::array();
  for (const auto& o : plan.objects) {
    objects.push_back({{"original", labels.name(o.original)},
                       {"target", labels.name(o.target)},
                       {"victim", o.victim},
                       {"box", box_json(o.box)}});
  }
  j["objects"] = objects;
  j["source_scene"] = plan.source_scene ? json(*plan.source_scene) : json(nullptr);
  j["s1"] = optional_number(plan.s1);
  j["s2"] = optional_number(plan.s2);
  j["score"] = optional_number(plan.score);
  j["matched_fraction"] = optional_number(plan.matched_fraction);
  j["pool_size"] = plan.pool_size;
  j["pool_capped"] = plan.pool_capped;
  return j;
}

PlanRecord plan_from_json(const json& j, const LabelSpace& labels) {
  try {
    PlanRecord rec;
    rec.request = request_from_json(j.at("request"), labels);
    rec.width = j.value("width", 1.0);
    rec.height = j.value("height", 1.0);
    rec.config = j.value("config", json::object());
    if (j.at("status") != "ok") {
      rec.error = j.value("error", std::string("unknown failure"));
      return rec;
    }
    rec.r1_fallback = j.value("r1_fallback", false);
    AttackPlan plan;
    plan.scene_id = j.at("scene_id").get<std::string>();
    plan.generator = j.at("generator").get<std::string>();
    for (const auto& v : j.at("victims")) {
      plan.victims.victims.push_back(
          {v.at("object").get<std::size_t>(), box_from(v.at("box")), labels.at(v.at("target").get<std::string>())});
    }
    plan.victims.r1_fallback = rec.r1_fallback;
    for (const auto& o : j.at("objects")) {
      plan.objects.push_back({box_from(o.at("box")), labels.at(o.at("original").get<std::string>()),
                              labels.at(o.at("target").get<std::string>()), o.at("victim").get<bool>()});
    }
    if (j.contains("source_scene") && !j["source_scene"].is_null()) {
      plan.source_scene = j["source_scene"].get<std::string>();
    }
    plan.s1 = number_from(j, "s1");
    plan.s2 = number_from(j, "s2");
    plan.score = number_from(j, "score");
    plan.matched_fraction = number_from(j, "matched_fraction");
    plan.pool_size = j.value("pool_size", std::size_t{0});
    plan.pool_capped = j.value("pool_capped", false);
    rec.plan = std::move(plan);
    return rec;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed plan record: ") + e.what());
  }
}

std::vector<PlanRecord> load_plans(const std::filesystem::path& path, const LabelSpace& labels) {
  std::vector<PlanRecord> out;
  for (const auto& j : parse_json_lines(read_text_file(path))) out.push_back(plan_from_json(j, labels));
  return out;
}

void save_plans(const std::vector<PlanRecord>& plans, const LabelSpace& labels, const std::filesystem::path& path) {
  std::string text;
  for (const auto& p : plans) text += plan_to_json(p, labels).dump() + "\n";
  write_text_file(path, text);
}

json report_to_json(const EvaluationReport& report) {
  json j;
  j["format"] = "glow-report";
  j["version"] = 1;
  j["config"] = {{"density_threshold", report.config.density_threshold},
                 {"density_comparison", ">="},
                 {"fooling_iou", report.config.fooling_iou},
                 {"fooling_comparison", ">"},
                 {"recall_iou", report.config.recall_iou},
                 {"recall_floor", report.config.recall_floor},
                 {"recall_comparison", ">"}};
  json scenes = json::array();
  for (const auto& ev : report.scenes) {
    json s = {{"scene_id", ev.scene_id},
              {"kind", to_string(ev.kind)},
              {"generator", ev.generator},
              {"evaluated", ev.evaluated}};
    if (!ev.evaluated) {
      s["note"] = ev.note;
    } else {
      s["members"] = ev.members;
      s["columns"] = ev.columns;
      s["density"] = optional_number(ev.density);
      s["recall"] = optional_number(ev.recall);
    }
    scenes.push_back(std::move(s));
  }
  j["scenes"] = scenes;
  json summary = json::object();
  for (const auto& [kind, sum] : report.summary) {
    json rates = json::object();
    for (const auto& [col, rate] : sum.rates) rates[col] = rate;
    summary[to_string(kind)] = {{"evaluated", sum.evaluated}, {"unevaluated", sum.unevaluated}, {"rates", rates}};
  }
  j["summary"] = summary;
  j["unevaluated"] = report.unevaluated;
  return j;
}

std::string format_report_table(const EvaluationReport& report) {
  std::ostringstream out;
  char buf[64];
  if (report.summary.empty()) out << "no scenes evaluated\n";
  for (const auto& [kind, sum] : report.summary) {
    out << "request " << to_string(kind) << "  (evaluated " << sum.evaluated << ", unevaluated " << sum.unevaluated
        << ")\n";
    const auto& cols = report_columns(kind);
    for (const auto& c : cols) {
      std::snprintf(buf, sizeof buf, "%8s", c.c_str());
      out << buf;
    }
    out << '\n';
    for (const auto& c : cols) {
      std::snprintf(buf, sizeof buf, "%8.3f", sum.rates.at(c));
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace glow
