#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "glow/metrics.hpp"
#include "glow/oracle_attacker.hpp"
#include "glow/planner.hpp"

namespace glow {

/// Everything a batch command needs. Populated from a flat `key = value`
/// config file and then overridden by command-line flags.
struct RunConfig {
  std::filesystem::path corpus;       // COCO annotations
  std::filesystem::path predictions;  // victim-scene prediction dump
  std::filesystem::path embeddings;
  std::filesystem::path models;
  std::filesystem::path requests;
  std::filesystem::path plans;
  std::filesystem::path attacked;  // post-attack prediction dump
  std::filesystem::path report;

  std::vector<double> lambdas{1.0};
  double match_threshold = 0.95;
  double giou_floor = 0.0;
  std::size_t candidate_cap = 20000;
  std::size_t components = 5;

  RequestKind request_kind = RequestKind::R2;
  std::optional<int> percentile;  // unset: emit 5, 50 and 95
  std::size_t count = 0;          // 0: 1 for R1/R2, 2 for R3
  std::string generator = "glow";

  std::optional<std::uint64_t> seed;
  unsigned workers = 1;

  double flip_probability = 1.0;
  double jitter = 0.0;
  MetricConfig metrics;

  std::size_t effective_count() const noexcept;
  PlanConfig plan_config(double lambda) const;
};

// Reads `key = value` lines ('#' starts a comment). Unknown keys are errors.
std::map<std::string, std::string> parse_config_text(const std::string& text);
void apply_config(RunConfig& config, const std::map<std::string, std::string>& values);
RunConfig load_run_config(const std::filesystem::path& path);

// Plan file for one value of a lambda sweep: "plans.jsonl" -> "plans.lambda-0.5.jsonl".
std::filesystem::path sweep_path(const std::filesystem::path& base, double lambda);

// Each command returns a process exit code. Per-scene problems are logged to
// `log` and never abort the batch.
int cmd_fit(const RunConfig& config, std::ostream& log);
int cmd_rank_labels(const RunConfig& config, std::ostream& log);
int cmd_plan(const RunConfig& config, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& log);

// Orders scene ids numerically when both are integers, else lexicographically.
bool scene_id_less(const std::string& a, const std::string& b);

}  // namespace glow
