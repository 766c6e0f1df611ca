#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "regionplan/estimates.hpp"
#include "regionplan/materializer.hpp"
#include "regionplan/regions.hpp"
#include "regionplan/workflow.hpp"

namespace regionplan {

struct MaterializationLogEntry {
    ConflictContext context;
    std::vector<MaterializationChoice> choices;  ///< every enumerated choice
    std::vector<bool> feasible;                  ///< per choice: breaks the conflicting cycle
    std::vector<ChoiceEvaluation> evaluations;   ///< one per feasible choice when the policy estimates
    std::size_t chosen = 0;
    std::string policy;
    std::vector<std::string> inserted_operators;
    std::vector<std::string> inserted_links;
    std::vector<std::string> broken_regions;
    std::vector<std::string> writer_regions;
    std::vector<std::string> reader_regions;
};

struct MaterializationLog {
    std::vector<MaterializationLogEntry> entries;
};

/// Mutable state of the region-graph construction. Copyable, so candidate
/// choices can be tried on a copy and planned to completion.
struct PlanState {
    WorkflowDag dag;
    RegionGraph graph;
    std::vector<std::string> order;  ///< topological order of the input operators
    std::size_t cursor = 0;          ///< operator of `order` being processed
    std::set<std::string> processed_links;
    int next_region = 1;
    MaterializationLog log;
};

struct ChoiceDecision {
    std::size_t chosen = 0;  ///< MaterializationChoice::index
    std::vector<ChoiceEvaluation> evaluations;
};

/// Picks one of the feasible choices (never empty) of a conflict.
using Chooser = std::function<ChoiceDecision(const PlanState&, const ConflictContext&,
                                             const std::vector<MaterializationChoice>&)>;

struct PlannerOptions {
    Chooser chooser;  ///< empty: take the first feasible choice
    std::string policy_name = "first";
    std::size_t cut_bound = kDefaultCutSpaceBound;
};

struct PlanResult {
    WorkflowDag dag;
    RegionGraph graph;
    Schedule schedule;
    MaterializationLog log;
};

/// Regions produced by materializing one choice.
struct SplitResult {
    std::vector<std::string> broken_regions;
    std::vector<std::string> writer_regions;
    std::string primary_writer;  ///< re-extracted region of the conflict region's source
    std::vector<std::string> reader_regions;
    std::vector<std::string> inserted_operators;
    std::vector<std::string> inserted_links;
};

PlanState start_plan(const WorkflowDag& dag);
void run_to_completion(PlanState& state, const PlannerOptions& options);
PlanResult finish_plan(const PlanState& state);

/// Builds an acyclic region graph, inserting materialization on cycle threats.
PlanResult build_region_graph(const WorkflowDag& dag, const PlannerOptions& options = {});

/// Applies a choice to the DAG, replaces the broken regions, creates the
/// reader regions and recomputes all region-graph edges of processed links.
SplitResult apply_materialization(PlanState& state, const ConflictContext& ctx,
                                  const MaterializationChoice& choice);

/// Resolves one cycle threat: enumerate, filter feasible, choose, apply.
void add_materialization(PlanState& state, const std::string& r_u, const std::string& r_o,
                         const std::string& conflict_op, const std::string& blocking_link,
                         const PlannerOptions& options);

struct Candidate {
    PlanResult plan;
    SplitResult split;
};

/// The complete plan obtained by applying `choice` to a copy of `state` and
/// resolving any later conflict with the first feasible choice.
Candidate complete_candidate(const PlanState& state, const ConflictContext& ctx,
                             const MaterializationChoice& choice);

} // namespace regionplan
