// glow: layout-aware attack planning for object-detection scenes.
//
//   glow fit          --corpus ann.json --models models.txt --seed 1
//   glow rank-labels  --corpus ann.json --predictions preds.jsonl --embeddings vec.txt --requests req.jsonl
//   glow plan         --corpus ann.json --predictions preds.jsonl --models models.txt --requests req.jsonl --plans plans.jsonl
//   glow simulate     --corpus ann.json --plans plans.jsonl --attacked attacked.jsonl --seed 1
//   glow evaluate     --corpus ann.json --models models.txt --plans plans.jsonl --attacked attacked.jsonl --report report.json
//
// Every option may also come from `--config run.cfg` (key = value lines);
// flags given on the command line win.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glow/error.hpp"
#include "glow/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::map<std::string, std::string> values;
};

// Registers a string-valued flag whose value, when given, is recorded under
// `key` and later applied on top of the config file.
void flag(CLI::App& app, Overrides& o, const std::string& name, const std::string& key, const std::string& help) {
  app.add_option_function<std::string>(name, [&o, key](const std::string& v) { o.values[key] = v; }, help);
}

void common_flags(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config, "Run configuration file (key = value)");
  flag(app, o, "--seed", "seed", "Run seed; per-scene seeds derive from it");
  flag(app, o, "--workers", "workers", "Worker threads");
  flag(app, o, "--corpus", "corpus", "COCO instances annotation file");
  flag(app, o, "--predictions", "predictions", "Victim-scene prediction dump (JSON lines)");
  flag(app, o, "--models", "models", "Location model file");
  flag(app, o, "--embeddings", "embeddings", "Plain-text word embedding file");
  flag(app, o, "--requests", "requests", "Request file (JSON lines)");
  flag(app, o, "--plans", "plans", "Plan file (JSON lines)");
  flag(app, o, "--attacked", "attacked", "Post-attack prediction dump");
  flag(app, o, "--report", "report", "Evaluation report (JSON)");
  flag(app, o, "--lambda", "lambda", "Layout weight; comma-separated values run a sweep");
  flag(app, o, "--generator", "generator", "glow | same | random | identity");
  flag(app, o, "--percentile", "percentile", "Target-label percentile: 5, 50 or 95");
  flag(app, o, "--request", "request", "Request kind: r1, r2 or r3");
  flag(app, o, "--count", "count", "Target count K for r3 (default 2)");
  flag(app, o, "--components", "components", "Mixture components per category (default 5)");
  flag(app, o, "--match-threshold", "match_threshold", "Required matched fraction (default 0.95)");
  flag(app, o, "--giou-floor", "giou_floor", "GIoU a matched pair must exceed (default 0)");
  flag(app, o, "--candidate-cap", "candidate_cap", "Maximum corpus scenes scored per plan");
  flag(app, o, "--flip-probability", "flip_probability", "Oracle attacker success probability");
  flag(app, o, "--jitter", "jitter", "Oracle attacker box noise (normalized units)");
  flag(app, o, "--density-threshold", "density_threshold", "T metric threshold (default 0.02, inclusive)");
  flag(app, o, "--recall-floor", "recall_floor", "R metric floor (default 0.5, strict)");
}

glow::RunConfig resolve(const Overrides& o) {
  glow::RunConfig config;
  if (!o.config.empty()) config = glow::load_run_config(o.config);
  glow::apply_config(config, o.values);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layout-aware attack planning for object-detection scenes"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
  };
  const std::vector<Command> commands{
      {"fit", "Fit per-category location models on the corpus"},
      {"rank-labels", "Choose target labels by word-vector distance and write requests"},
      {"plan", "Generate attack plans for a request file"},
      {"simulate", "Run the oracle attacker over a plan file"},
      {"evaluate", "Score attacked predictions against the consistency metrics"},
  };
  std::map<std::string, Overrides> overrides;
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    common_flags(*sub, overrides[c.name]);
    subs[c.name] = sub;
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    glow::RunConfig config;
    try {
      config = resolve(overrides[name]);
    } catch (const std::exception& e) {
      std::cerr << name << ": " << e.what() << '\n';
      return 2;
    }
    if (name == "fit") return glow::cmd_fit(config, std::cerr);
    if (name == "rank-labels") return glow::cmd_rank_labels(config, std::cerr);
    if (name == "plan") return glow::cmd_plan(config, std::cerr);
    if (name == "simulate") return glow::cmd_simulate(config, std::cerr);
    if (name == "evaluate") return glow::cmd_evaluate(config, std::cout, std::cerr);
  }
  return 1;
}
