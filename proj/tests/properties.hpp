#pragma once

// Checks shared by the unit tests and the acceptance binary. Each returns an
// empty string on success and a description of the first violation otherwise.

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "regionplan/cost_model.hpp"
#include "regionplan/estimator.hpp"
#include "regionplan/materializer.hpp"
#include "regionplan/planner.hpp"
#include "regionplan/regions.hpp"
#include "regionplan/simulator.hpp"

namespace testprop {

using namespace regionplan;
using CutSet = std::set<std::vector<std::string>>;

/// Brute force over every subset of g_f: a subset is a choice when removing it
/// leaves the conflict operator unreachable from the boundary and S_o, and no
/// single link of it can be put back.
inline CutSet brute_force_cuts(const WorkflowDag& dag, const ConflictContext& ctx) {
    const std::vector<std::string>& gf = ctx.g_f;
    const std::size_t m = gf.size();
    std::set<std::string> starts(ctx.boundary.begin(), ctx.boundary.end());
    starts.insert(ctx.source_o);

    auto separated = [&](std::uint32_t removed) {
        std::set<std::string> seen(starts);
        std::vector<std::string> stack(starts.begin(), starts.end());
        while (!stack.empty()) {
            std::string v = stack.back();
            stack.pop_back();
            if (v == ctx.conflict_op) return false;
            for (std::size_t i = 0; i < m; ++i) {
                if (removed & (1u << i)) continue;
                const LinkSpec& l = dag.link(gf[i]);
                if (l.from == v && seen.insert(l.to).second) stack.push_back(l.to);
            }
        }
        return true;
    };

    CutSet out;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        if (!separated(mask)) continue;
        bool minimal = true;
        for (std::size_t i = 0; i < m && minimal; ++i) {
            if ((mask & (1u << i)) && separated(mask & ~(1u << i))) minimal = false;
        }
        if (!minimal) continue;
        std::vector<std::string> cut;
        for (std::size_t i = 0; i < m; ++i) {
            if (mask & (1u << i)) cut.push_back(gf[i]);
        }
        out.insert(cut);
    }
    return out;
}

inline CutSet as_set(const std::vector<MaterializationChoice>& choices) {
    CutSet out;
    for (const MaterializationChoice& c : choices) {
        std::vector<std::string> cut = c.cut;
        std::sort(cut.begin(), cut.end());
        out.insert(cut);
    }
    return out;
}

/// Conflict contexts met while planning `dag` with the first-choice policy.
inline std::vector<std::pair<WorkflowDag, ConflictContext>> collect_contexts(const WorkflowDag& dag) {
    std::vector<std::pair<WorkflowDag, ConflictContext>> seen;
    PlannerOptions options;
    options.chooser = [&](const PlanState& s, const ConflictContext& ctx,
                          const std::vector<MaterializationChoice>& feasible) {
        seen.emplace_back(s.dag, ctx);
        return ChoiceDecision{feasible.front().index, {}};
    };
    build_region_graph(dag, options);
    return seen;
}

using RegionKey = std::pair<std::string, std::vector<std::string>>;
using EdgeKey = std::tuple<std::string, std::string, std::string>;

inline std::set<RegionKey> region_keys(const RegionGraph& g) {
    std::set<RegionKey> out;
    for (const Region& r : g.regions) out.insert({r.source, r.members});
    return out;
}

inline std::set<EdgeKey> edge_keys(const RegionGraph& g) {
    std::set<EdgeKey> out;
    for (const RegionEdge& e : g.edges) out.insert({g.region(e.from).source, g.region(e.to).source, e.via_link});
    return out;
}

/// Structural invariants of a finished plan.
inline std::string check_plan_structure(const PlanResult& plan) {
    if (!is_acyclic(plan.graph)) return "region graph is cyclic";
    std::set<std::string> covered;
    for (const Region& r : plan.graph.regions) {
        Region fresh = extract_region(plan.dag, r.source, r.id);
        if (fresh.members != r.members) return "region " + r.id + " is not the pipelined closure of its source";
        covered.insert(r.members.begin(), r.members.end());
    }
    if (covered.size() != plan.dag.operator_count()) return "regions do not cover every operator";
    std::set<std::string> witnessed;
    for (const RegionEdge& e : plan.graph.edges) {
        const LinkSpec& l = plan.dag.link(e.via_link);
        if (!l.blocking()) return "edge via pipelined link " + l.id;
        if (!plan.graph.region(e.from).contains(l.from) || !plan.graph.region(e.to).contains(l.to)) {
            return "edge " + e.from + "->" + e.to + " not witnessed by " + l.id;
        }
        witnessed.insert(l.id);
    }
    for (const LinkSpec& l : plan.dag.links()) {
        if (l.blocking() && !witnessed.count(l.id)) return "blocking link " + l.id + " has no region edge";
    }
    std::set<std::string> scheduled(plan.schedule.order.begin(), plan.schedule.order.end());
    if (scheduled.size() != plan.graph.regions.size()) return "schedule does not list every region once";
    return {};
}

/// Acyclicity, soundness and idempotence of build_region_graph on one DAG.
inline std::string check_build(const WorkflowDag& dag) {
    PlanResult first = build_region_graph(dag);
    if (std::string e = check_plan_structure(first); !e.empty()) return e;
    PlanResult again = build_region_graph(first.dag);
    if (!again.log.entries.empty()) return "re-planning the output inserted materialization";
    if (!(again.dag == first.dag)) return "re-planning changed the DAG";
    if (region_keys(again.graph) != region_keys(first.graph)) return "re-planning changed the regions";
    if (edge_keys(again.graph) != edge_keys(first.graph)) return "re-planning changed the region edges";
    return {};
}

/// report.tau equals the schedule prefix of full times plus the first-output
/// time of the first region whose window produced the d-th result tuple.
inline std::string check_additivity(const SimReport& report, const std::vector<CostEstimate>& regions) {
    double prefix = 0.0;
    for (const CostEstimate& e : regions) {
        if (e.t_first) {
            if (!report.tau) return "region " + e.region + " has a first output but tau is null";
            double formula = prefix + *e.t_first;
            if (std::fabs(formula - *report.tau) > 1e-9) {
                return "tau " + std::to_string(*report.tau) + " != formula " + std::to_string(formula);
            }
            return {};
        }
        prefix += e.t_full;
    }
    if (report.tau) return "tau present but no region reports a first output";
    return {};
}

inline std::string check_conservation(const WorkflowDag& dag, const CostModel& costs, const SimReport& report,
                                      MatCosts mat = {}) {
    Cardinalities card = propagate_cardinalities(dag, costs, mat);
    for (const LinkSpec& l : dag.links()) {
        if (report.link_tuples.at(l.id) != card.links.at(l.id)) {
            return "link " + l.id + ": simulated " + std::to_string(report.link_tuples.at(l.id)) + ", propagated " +
                   std::to_string(card.links.at(l.id));
        }
    }
    return {};
}

/// Plans with the first-choice policy, then checks additivity and conservation
/// and that materialization left every original link count unchanged.
inline std::string check_simulation(const WorkflowDag& dag, const CostModel& costs, const SimConfig& cfg = {}) {
    PlanResult plan = build_region_graph(dag);
    SimReport report = simulate(plan.dag, plan.graph, plan.schedule, costs, cfg);
    if (std::string e = check_additivity(report, measure_region_times(report, plan.graph, plan.dag)); !e.empty()) {
        return e;
    }
    if (std::string e = check_conservation(plan.dag, costs, report, MatCosts{cfg.writer_cost, cfg.reader_cost});
        !e.empty()) {
        return e;
    }
    Cardinalities original = propagate_cardinalities(dag, costs);
    for (const LinkSpec& l : dag.links()) {
        // A cut link survives as its reader-side link.
        std::string id = plan.dag.has_link(l.id) ? l.id : materialization_ids(l.id).reader_to_dest;
        if (report.link_tuples.at(id) != original.links.at(l.id)) return "materialization changed the count of " + l.id;
    }
    for (const OperatorSpec& op : dag.operators()) {
        if (op.is_result && original.produced.at(op.id) !=
                                propagate_cardinalities(plan.dag, costs, MatCosts{cfg.writer_cost, cfg.reader_cost})
                                    .produced.at(op.id)) {
            return "materialization changed the output of " + op.id;
        }
    }
    return {};
}

} // namespace testprop
