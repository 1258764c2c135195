#include "glow/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "glow/error.hpp"
#include "glow/ingestion.hpp"
#include "glow/location_model.hpp"
#include "glow/records.hpp"
#include "glow/seeding.hpp"
#include "glow/wordspace.hpp"

namespace glow {

using nlohmann::json;

std::size_t RunConfig::effective_count() const noexcept {
  if (count != 0) return count;
  return request_kind == RequestKind::R3 ? 2 : 1;
}

PlanConfig RunConfig::plan_config(double lambda) const {
  PlanConfig pc;
  pc.lambda = lambda;
  pc.match_threshold = match_threshold;
  pc.giou_floor = giou_floor;
  pc.candidate_cap = candidate_cap;
  pc.workers = workers;
  return pc;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string canonical_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ValidationError("config key '" + key + "': '" + v + "' is not a number");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError("config key '" + key + "': '" + v + "' is not a non-negative integer");
  }
  return out;
}

std::vector<double> to_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  if (out.empty()) throw ValidationError("config key '" + key + "' is empty");
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected 'key = value'", line_no);
    }
    values[canonical_key(trim(stripped.substr(0, eq)))] = trim(stripped.substr(eq + 1));
  }
  return values;
}

void apply_config(RunConfig& c, const std::map<std::string, std::string>& values) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::unordered_map<std::string, Setter> setters{
      {"corpus", [&](auto&, auto& v) { c.corpus = v; }},
      {"predictions", [&](auto&, auto& v) { c.predictions = v; }},
      {"embeddings", [&](auto&, auto& v) { c.embeddings = v; }},
      {"models", [&](auto&, auto& v) { c.models = v; }},
      {"requests", [&](auto&, auto& v) { c.requests = v; }},
      {"plans", [&](auto&, auto& v) { c.plans = v; }},
      {"attacked", [&](auto&, auto& v) { c.attacked = v; }},
      {"report", [&](auto&, auto& v) { c.report = v; }},
      {"lambda", [&](auto& k, auto& v) { c.lambdas = to_double_list(k, v); }},
      {"match_threshold", [&](auto& k, auto& v) { c.match_threshold = to_double(k, v); }},
      {"giou_floor", [&](auto& k, auto& v) { c.giou_floor = to_double(k, v); }},
      {"candidate_cap", [&](auto& k, auto& v) { c.candidate_cap = to_u64(k, v); }},
      {"components", [&](auto& k, auto& v) { c.components = to_u64(k, v); }},
      {"request", [&](auto&, auto& v) { c.request_kind = request_kind_from_string(v); }},
      {"percentile",
       [&](auto& k, auto& v) { c.percentile = static_cast<int>(percentile_from_int(static_cast<int>(to_u64(k, v)))); }},
      {"count", [&](auto& k, auto& v) { c.count = to_u64(k, v); }},
      {"generator", [&](auto&, auto& v) { c.generator = v; }},
      {"seed", [&](auto& k, auto& v) { c.seed = to_u64(k, v); }},
      {"workers", [&](auto& k, auto& v) { c.workers = static_cast<unsigned>(to_u64(k, v)); }},
      {"flip_probability", [&](auto& k, auto& v) { c.flip_probability = to_double(k, v); }},
      {"jitter", [&](auto& k, auto& v) { c.jitter = to_double(k, v); }},
      {"density_threshold", [&](auto& k, auto& v) { c.metrics.density_threshold = to_double(k, v); }},
      {"fooling_iou", [&](auto& k, auto& v) { c.metrics.fooling_iou = to_double(k, v); }},
      {"recall_iou", [&](auto& k, auto& v) { c.metrics.recall_iou = to_double(k, v); }},
      {"recall_floor", [&](auto& k, auto& v) { c.metrics.recall_floor = to_double(k, v); }},
  };
  for (const auto& [key, value] : values) {
    auto it = setters.find(canonical_key(key));
    if (it == setters.end()) throw ValidationError("unknown config key '" + key + "'");
    it->second(key, value);
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig c;
  apply_config(c, parse_config_text(read_text_file(path)));
  return c;
}

std::filesystem::path sweep_path(const std::filesystem::path& base, double lambda) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", lambda);
  auto out = base;
  out.replace_filename(base.stem().string() + ".lambda-" + buf + base.extension().string());
  return out;
}

bool scene_id_less(const std::string& a, const std::string& b) {
  auto as_int = [](const std::string& s) -> std::optional<long long> {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
  };
  const auto ia = as_int(a);
  const auto ib = as_int(b);
  if (ia && ib) return *ia < *ib;
  if (ia.has_value() != ib.has_value()) return ia.has_value();  // numeric ids first
  return a < b;
}

namespace {

void require_path(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw ValidationError(std::string("missing required path: ") + what);
  if (!std::filesystem::exists(p)) throw ValidationError(std::string(what) + " '" + p.string() + "' does not exist");
}

void require_output(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw ValidationError(std::string("missing required output path: ") + what);
}

std::uint64_t require_seed(const RunConfig& c, const char* command) {
  if (!c.seed) throw ValidationError(std::string(command) + " is stochastic and needs --seed");
  return *c.seed;
}

template <typename Fn>
int guarded(std::ostream& log, const char* command, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    log << command << ": error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int cmd_fit(const RunConfig& config, std::ostream& log) {
  return guarded(log, "fit", [&] {
    require_path(config.corpus, "corpus");
    require_output(config.models, "models");
    const auto corpus = load_annotations(config.corpus);
    FitOptions options;
    options.components = config.components;
    options.seed = require_seed(config, "fit");
    std::vector<CategoryFitSummary> summary;
    const auto models = fit_category_models(corpus, options, config.workers, &summary);
    save_models(models, config.models);
    for (const auto& row : summary) {
      char buf[256];
      if (row.components == 0) {
        std::snprintf(buf, sizeof buf, "%-20s samples %6zu  %s\n", row.category.c_str(), row.samples,
                      row.note.c_str());
      } else {
        std::snprintf(buf, sizeof buf, "%-20s samples %6zu  Q %zu  loglik %.6f%s%s\n", row.category.c_str(),
                      row.samples, row.components, row.log_likelihood, row.reduced ? "  " : "",
                      row.reduced ? row.note.c_str() : "");
      }
      log << buf;
    }
    log << "fit: " << models.size() << " models written to " << config.models.string() << '\n';
    return 0;
  });
}

int cmd_rank_labels(const RunConfig& config, std::ostream& log) {
  return guarded(log, "rank-labels", [&] {
    require_path(config.corpus, "corpus");
    require_path(config.predictions, "predictions");
    require_path(config.embeddings, "embeddings");
    require_output(config.requests, "requests");
    const auto corpus = load_annotations(config.corpus);
    const auto& labels = corpus.labels();
    auto scenes = load_predictions(config.predictions, labels).scenes;
    std::stable_sort(scenes.begin(), scenes.end(),
                     [](const SceneLayout& a, const SceneLayout& b) { return scene_id_less(a.id, b.id); });
    const WordVectorTable table(labels, load_embeddings(config.embeddings));

    std::vector<Percentile> percentiles{Percentile::P5, Percentile::P50, Percentile::P95};
    if (config.percentile) percentiles = {percentile_from_int(*config.percentile)};

    std::vector<AttackRequest> requests;
    std::size_t failed = 0;
    for (const auto& scene : scenes) {
      try {
        for (auto p : percentiles) {
          AttackRequest r;
          r.scene_id = scene.id;
          r.kind = config.request_kind;
          r.count = config.effective_count();
          r.percentile = p;
          r.target = rank_targets(scene, table, p);
          r.validate();
          requests.push_back(r);
        }
      } catch (const Error& e) {
        ++failed;
        log << "rank-labels: scene " << scene.id << ": " << e.what() << '\n';
      }
    }
    save_requests(requests, labels, config.requests);
    log << "rank-labels: " << requests.size() << " requests, " << failed << " scenes skipped\n";
    return 0;
  });
}

int cmd_plan(const RunConfig& config, std::ostream& log) {
  return guarded(log, "plan", [&] {
    require_path(config.corpus, "corpus");
    require_path(config.predictions, "predictions");
    require_path(config.requests, "requests");
    require_output(config.plans, "plans");
    const auto& gen = config.generator;
    if (gen != "glow" && gen != "same" && gen != "random" && gen != "identity") {
      throw ValidationError("unknown generator '" + gen + "' (expected glow, same, random or identity)");
    }
    if (config.lambdas.empty()) throw ValidationError("no lambda given");

    const auto corpus = load_annotations(config.corpus);
    const auto& labels = corpus.labels();
    const auto requests = load_requests(config.requests, labels);
    const auto predictions = load_predictions(config.predictions, labels);
    std::unordered_map<std::string, const SceneLayout*> scenes;
    for (const auto& s : predictions.scenes) scenes.emplace(s.id, &s);

    const bool needs_models = std::any_of(requests.begin(), requests.end(), [&](const AttackRequest& r) {
      return gen == "glow" && r.kind != RequestKind::R1;
    });
    ModelSet models;
    if (needs_models) {
      require_path(config.models, "models");
      models = load_models(config.models);
    }
    const bool needs_seed = gen == "random" || (gen != "glow" && std::any_of(requests.begin(), requests.end(),
                                                                             [](const AttackRequest& r) {
                                                                               return r.kind != RequestKind::R1;
                                                                             }));
    const std::uint64_t seed = needs_seed ? require_seed(config, "plan with this generator") : config.seed.value_or(0);

    std::optional<WordVectorTable> table;
    if (std::any_of(requests.begin(), requests.end(), [](const AttackRequest& r) { return !r.target; })) {
      require_path(config.embeddings, "embeddings");
      table.emplace(labels, load_embeddings(config.embeddings));
    }

    for (double lambda : config.lambdas) {
      const PlanConfig pc = config.plan_config(lambda);
      pc.validate();
      const json snapshot = {{"generator", gen},
                             {"lambda", lambda},
                             {"match_threshold", pc.match_threshold},
                             {"giou_floor", pc.giou_floor},
                             {"candidate_cap", pc.candidate_cap},
                             {"seed", config.seed ? json(*config.seed) : json(nullptr)}};
      std::vector<PlanRecord> records;
      std::vector<double> scores;
      std::size_t failed = 0;
      for (auto request : requests) {
        PlanRecord rec;
        rec.config = snapshot;
        try {
          auto it = scenes.find(request.scene_id);
          if (it == scenes.end()) throw ValidationError("no predictions for scene");
          const SceneLayout& scene = *it->second;
          rec.width = scene.width;
          rec.height = scene.height;
          if (!request.target) request.target = rank_targets(scene, *table, *request.percentile);
          rec.request = request;
          const CategoryId target = *request.target;

          VictimSet victims;
          if (gen == "glow" || request.kind == RequestKind::R1) {
            victims = build_victim_set(request, scene, models, labels);
          } else {
            victims = victims_from_indices(
                scene,
                select_random_victims(scene, target, request.count, derive_seed(seed, "victims:" + scene.id)),
                target);
          }
          rec.r1_fallback = victims.r1_fallback;
          if (victims.r1_fallback) log << "plan: scene " << scene.id << ": no prediction above 0.85, using the most confident\n";

          if (gen == "glow") {
            rec.plan = generate_plan(scene, victims, corpus, pc).plan;
            scores.push_back(*rec.plan->score);
          } else if (gen == "same") {
            rec.plan = plan_same(scene, victims, target);
          } else if (gen == "random") {
            rec.plan = plan_random(scene, victims, labels.size(), derive_seed(seed, "permutation:" + scene.id));
          } else {
            rec.plan = plan_identity(scene, victims);
          }
        } catch (const Error& e) {
          rec.request = request;
          rec.plan.reset();
          rec.error = e.what();
          ++failed;
          log << "plan: scene " << request.scene_id << ": " << e.what() << '\n';
        }
        records.push_back(std::move(rec));
      }
      const auto path = config.lambdas.size() == 1 ? config.plans : sweep_path(config.plans, lambda);
      save_plans(records, labels, path);

      char buf[256];
      std::snprintf(buf, sizeof buf, "plan: lambda %g  %zu planned, %zu failed -> %s\n", lambda,
                    records.size() - failed, failed, path.string().c_str());
      log << buf;
      if (!scores.empty()) {
        const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
        double mean = 0.0;
        for (double s : scores) mean += s;
        mean /= static_cast<double>(scores.size());
        std::snprintf(buf, sizeof buf, "plan: score min %.4f  mean %.4f  max %.4f\n", *mn, mean, *mx);
        log << buf;
      }
    }
    return 0;
  });
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
  return guarded(log, "simulate", [&] {
    require_path(config.corpus, "corpus");
    require_path(config.plans, "plans");
    require_output(config.attacked, "attacked");
    const std::uint64_t seed = require_seed(config, "simulate");
    const auto corpus = load_annotations(config.corpus);
    const auto& labels = corpus.labels();
    const auto plans = load_plans(config.plans, labels);

    PredictionSet out;
    out.header = {{"format", "glow-predictions"},
                  {"version", 1},
                  {"source", "oracle-attacker"},
                  {"seed", seed},
                  {"flip_probability", config.flip_probability},
                  {"jitter", config.jitter}};
    std::size_t skipped = 0;
    for (const auto& rec : plans) {
      if (!rec.plan) {
        ++skipped;
        continue;
      }
      try {
        SceneLayout scene = scene_from_plan(*rec.plan);
        scene.width = rec.width;
        scene.height = rec.height;
        OracleConfig oc{config.flip_probability, config.jitter, derive_seed(seed, "attack:" + scene.id)};
        out.scenes.push_back(execute_plan(scene, *rec.plan, oc));
      } catch (const Error& e) {
        ++skipped;
        log << "simulate: scene " << rec.request.scene_id << ": " << e.what() << '\n';
      }
    }
    save_predictions(out, labels, config.attacked);
    log << "simulate: " << out.scenes.size() << " scenes attacked, " << skipped << " skipped (seed " << seed << ")\n";
    return 0;
  });
}

int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& log) {
  return guarded(log, "evaluate", [&] {
    require_path(config.corpus, "corpus");
    require_path(config.plans, "plans");
    require_path(config.attacked, "attacked");
    require_output(config.report, "report");
    const auto corpus = load_annotations(config.corpus);
    const auto& labels = corpus.labels();
    const auto plans = load_plans(config.plans, labels);
    ModelSet models;
    if (std::any_of(plans.begin(), plans.end(), [](const PlanRecord& r) { return r.request.kind != RequestKind::R1; })) {
      require_path(config.models, "models");
      models = load_models(config.models);
    }
    const auto attacked = load_predictions(config.attacked, labels);
    const auto cooc = build_cooccurrence(corpus);

    std::vector<PlannedScene> planned;
    for (const auto& rec : plans) planned.push_back({rec.request, rec.plan, rec.error});
    const EvaluationContext ctx{corpus, cooc, models, config.metrics};
    const auto report = evaluate(planned, attacked.scenes, ctx, config.workers);
    write_text_file(config.report, report_to_json(report).dump(2) + "\n");
    out << format_report_table(report);
    log << "evaluate: " << report.scenes.size() - report.unevaluated << " evaluated, " << report.unevaluated
        << " unevaluated -> " << config.report.string() << '\n';
    return 0;
  });
}

}  // namespace glow
