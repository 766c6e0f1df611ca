#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "regionplan/estimates.hpp"
#include "regionplan/regions.hpp"
#include "regionplan/workflow.hpp"

namespace regionplan {

struct OperatorCost {
    double per_tuple_cost = 0.0;  ///< seconds per input tuple (per emitted tuple for sources)
    double selectivity = 1.0;     ///< output tuples per input tuple
    std::optional<std::uint64_t> scan_cardinality;
    std::optional<double> blocking_input_cost;  ///< defaults to per_tuple_cost
};

struct CostModel {
    std::map<std::string, OperatorCost> operators;
    std::optional<int> cores;  ///< empty: unbounded
};

/// Per-tuple costs of planner-inserted operators when the model has no entry.
struct MatCosts {
    double writer = 0.0;
    double reader = 0.0;
};

/// Cost entry of one operator with every default applied.
struct ResolvedCost {
    double per_tuple_cost = 0.0;
    double selectivity = 1.0;
    std::uint64_t scan_cardinality = 0;
    double blocking_input_cost = 0.0;
};

CostModel parse_cost_model(std::string_view text);

/// Index-aligned with dag.operators(). Throws MissingCost or CostModelError.
std::vector<ResolvedCost> resolve_costs(const WorkflowDag& dag, const CostModel& costs, MatCosts mat = {});

/// Cumulative floor rule: output count after consuming `consumed` tuples.
std::uint64_t emitted_after(std::uint64_t consumed, double selectivity);

/// Fewest consumed tuples after which at least `need` outputs exist.
std::optional<std::uint64_t> inputs_for_outputs(std::uint64_t need, double selectivity);

struct Cardinalities {
    std::map<std::string, std::uint64_t> links;
    std::map<std::string, std::uint64_t> consumed;  ///< per operator, all input links
    std::map<std::string, std::uint64_t> produced;  ///< per operator
};

Cardinalities propagate_cardinalities(const WorkflowDag& dag, const CostModel& costs, MatCosts mat = {});

/// Analytic surrogate for one region: t_full is the busiest single operator
/// (a lower bound of the simulated time), t_first the cheapest pipelined
/// source-to-result path computed backwards from `d` outputs (an upper bound
/// for uncontended chains).
CostEstimate bottleneck_estimate(const WorkflowDag& dag, const Region& region, const CostModel& costs,
                                 MatCosts mat = {}, std::uint64_t d = 1);

/// Every per-tuple and blocking-input cost multiplied by `factor`.
CostModel scale_costs(const CostModel& costs, double factor);

} // namespace regionplan
