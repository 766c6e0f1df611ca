#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "regionplan/estimates.hpp"
#include "regionplan/planner.hpp"
#include "regionplan/simulator.hpp"

namespace regionplan {

/// Sorted keys, two-space indent, every float printed with six decimals,
/// trailing newline. Identical values give identical bytes.
std::string canonical_json(const nlohmann::json& value);

nlohmann::json workflow_to_json(const WorkflowDag& dag);
nlohmann::json region_graph_to_json(const RegionGraph& graph);
RegionGraph region_graph_from_json(const nlohmann::json& doc);
nlohmann::json context_to_json(const ConflictContext& ctx);
nlohmann::json estimate_to_json(const CostEstimate& est);
nlohmann::json evaluation_to_json(const ChoiceEvaluation& ev);
nlohmann::json log_to_json(const MaterializationLog& log);

/// One object per conflict with every enumerated choice and its tau_c (null
/// when not estimated or infeasible).
nlohmann::json choices_to_json(const MaterializationLog& log);

struct PlanBundleInfo {
    std::string policy;
    std::uint64_t first_k = 1;
    std::optional<int> cores;
};
nlohmann::json plan_bundle_to_json(const PlanResult& plan, const PlanBundleInfo& info);

/// Workflow, region graph and schedule of a serialized plan bundle; the log is not restored.
PlanResult plan_bundle_from_json(std::string_view text);

nlohmann::json sim_report_to_json(const SimReport& report, const std::vector<CostEstimate>& regions);

} // namespace regionplan
