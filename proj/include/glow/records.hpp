#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "glow/metrics.hpp"

namespace glow {

// Request file: one JSON object per line.
//   {"scene_id": "42", "kind": "r2", "target": "cat", "percentile": 5, "count": 1}
// `target` may be omitted when `percentile` is given and embeddings are
// available at planning time; `victim_index` is R1-only.
nlohmann::json request_to_json(const AttackRequest& request, const LabelSpace& labels);
AttackRequest request_from_json(const nlohmann::json& j, const LabelSpace& labels);
std::vector<AttackRequest> load_requests(const std::filesystem::path& path, const LabelSpace& labels);
void save_requests(const std::vector<AttackRequest>& requests, const LabelSpace& labels,
                   const std::filesystem::path& path);

/// One line of a plan file. Failed scenes keep their request echo and an
/// error message but carry no plan.
struct PlanRecord {
  AttackRequest request;
  std::optional<AttackPlan> plan;
  std::string error;
  double width = 1.0;
  double height = 1.0;
  bool r1_fallback = false;
  nlohmann::json config = nlohmann::json::object();
};

nlohmann::json plan_to_json(const PlanRecord& record, const LabelSpace& labels);
PlanRecord plan_from_json(const nlohmann::json& j, const LabelSpace& labels);
std::vector<PlanRecord> load_plans(const std::filesystem::path& path, const LabelSpace& labels);
void save_plans(const std::vector<PlanRecord>& plans, const LabelSpace& labels, const std::filesystem::path& path);

nlohmann::json report_to_json(const EvaluationReport& report);
// Aligned text table, one block per request kind.
std::string format_report_table(const EvaluationReport& report);

}  // namespace glow
