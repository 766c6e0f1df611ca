#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "regionplan/cost_model.hpp"
#include "regionplan/estimates.hpp"
#include "regionplan/planner.hpp"
#include "regionplan/simulator.hpp"

namespace regionplan {

enum class ChoicePolicy { simulate, bottleneck, first, materialized_size };

std::string_view to_string(ChoicePolicy policy);
std::optional<ChoicePolicy> parse_policy(std::string_view text);

struct PlanEstimate {
    std::optional<double> tau;
    std::vector<CostEstimate> regions;  ///< schedule order
};

/// Simulated tau(d) and per-region times of a complete plan.
PlanEstimate estimate_plan(const PlanResult& plan, const CostModel& costs, const SimConfig& cfg = {});

/// Per-region estimates of a plan, in schedule order, from the simulator
/// (simulate) or the analytic bounds (bottleneck).
std::vector<CostEstimate> region_estimates(const PlanResult& plan, const CostModel& costs, const SimConfig& cfg,
                                           ChoicePolicy policy);

/// Estimated first-response time of one feasible choice.
ChoiceEvaluation evaluate_choice(const PlanState& state, const ConflictContext& ctx,
                                 const MaterializationChoice& choice, const CostModel& costs,
                                 const SimConfig& cfg, ChoicePolicy policy);

/// Evaluates every choice (in index order) and returns the argmin. Ties within
/// a relative 1e-9 go to fewer cut links, then to the lexicographically
/// smaller sorted cut. Throws MultipleResultOperators for time-based policies.
ChoiceDecision evaluate_and_choose(const PlanState& state, const ConflictContext& ctx,
                                   const std::vector<MaterializationChoice>& choices, const CostModel& costs,
                                   const SimConfig& cfg, ChoicePolicy policy);

Chooser make_chooser(ChoicePolicy policy, const CostModel& costs, const SimConfig& cfg);

/// Planner options for a policy; `first` needs no costs.
PlannerOptions planner_options(ChoicePolicy policy, const std::optional<CostModel>& costs, const SimConfig& cfg);

} // namespace regionplan
