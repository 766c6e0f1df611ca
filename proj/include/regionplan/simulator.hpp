#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regionplan/cost_model.hpp"
#include "regionplan/estimates.hpp"
#include "regionplan/regions.hpp"
#include "regionplan/workflow.hpp"

namespace regionplan {

struct SimConfig {
    std::optional<int> cores;  ///< overrides the cost model; empty and absent there: unbounded
    double writer_cost = 0.0;
    double reader_cost = 0.0;
    std::uint64_t d_target = 1;
    bool trace = false;
};

struct TraceEvent {
    double time = 0.0;
    std::string subject;  ///< operator id, or region id for region events
    std::string event;
};

struct RegionTiming {
    std::string id;
    double start = 0.0;
    double end = 0.0;
    /// Result outputs produced inside this window, absolute times, at most d.
    std::map<std::string, std::vector<double>> result_outputs;
};

struct SimReport {
    std::vector<RegionTiming> regions;  ///< schedule order
    std::map<std::string, std::vector<double>> first_output_times;  ///< per result operator, at most d
    std::map<std::string, std::uint64_t> link_tuples;
    std::map<std::string, std::uint64_t> materialized_tuples;  ///< per mat-writer
    std::optional<double> tau;
    double total_time = 0.0;
    std::uint64_t d_target = 1;
    std::optional<int> cores;
    std::vector<TraceEvent> trace;
};

/// Barrier-scheduled discrete-event run of `order`. Throws MissingCost or DeadlockDetected.
SimReport simulate(const WorkflowDag& dag, const RegionGraph& graph, const Schedule& order,
                   const CostModel& costs, const SimConfig& cfg = {});

/// t_full = end - start; t_first = d-th result output inside the window - start.
std::vector<CostEstimate> measure_region_times(const SimReport& report, const RegionGraph& graph,
                                               const WorkflowDag& dag);

/// CSV with header time,operator,event.
std::string trace_csv(const SimReport& report);

} // namespace regionplan
