#include "regionplan/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "regionplan/errors.hpp"

namespace regionplan {

namespace {

std::string single_result_operator(const WorkflowDag& dag) {
    std::vector<std::string> results;
    for (const OperatorSpec& op : dag.operators()) {
        if (op.is_result) results.push_back(op.id);
    }
    if (results.size() != 1) {
        throw MultipleResultOperators("estimating first-response time needs exactly one result operator, found " +
                                      std::to_string(results.size()));
    }
    return results.front();
}

std::vector<std::string> sorted_cut(std::vector<std::string> cut) {
    std::sort(cut.begin(), cut.end());
    return cut;
}

double objective(const ChoiceEvaluation& ev, ChoicePolicy policy) {
    if (policy == ChoicePolicy::materialized_size) return ev.materialized_tuples;
    return ev.tau_c.value_or(std::numeric_limits<double>::infinity());
}

// Strictly better objective, with a relative tolerance so that a common
// scaling of all costs cannot flip a tie.
int compare_objective(double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return a < b ? -1 : (b < a ? 1 : 0);
    double tol = 1e-9 * std::max(std::fabs(a), std::fabs(b));
    if (std::fabs(a - b) <= tol) return 0;
    return a < b ? -1 : 1;
}

bool better(const ChoiceEvaluation& a, const ChoiceEvaluation& b, ChoicePolicy policy) {
    int c = compare_objective(objective(a, policy), objective(b, policy));
    if (c != 0) return c < 0;
    if (a.cut.size() != b.cut.size()) return a.cut.size() < b.cut.size();
    return sorted_cut(a.cut) < sorted_cut(b.cut);
}

} // namespace

std::string_view to_string(ChoicePolicy policy) {
    switch (policy) {
        case ChoicePolicy::simulate: return "simulate";
        case ChoicePolicy::bottleneck: return "bottleneck";
        case ChoicePolicy::first: return "first";
        case ChoicePolicy::materialized_size: return "materialized-size";
    }
    return "simulate";
}

std::optional<ChoicePolicy> parse_policy(std::string_view text) {
    for (ChoicePolicy p : {ChoicePolicy::simulate, ChoicePolicy::bottleneck, ChoicePolicy::first,
                           ChoicePolicy::materialized_size}) {
        if (to_string(p) == text) return p;
    }
    return std::nullopt;
}

PlanEstimate estimate_plan(const PlanResult& plan, const CostModel& costs, const SimConfig& cfg) {
    SimConfig quiet = cfg;
    quiet.trace = false;
    SimReport report = simulate(plan.dag, plan.graph, plan.schedule, costs, quiet);
    return PlanEstimate{report.tau, measure_region_times(report, plan.graph, plan.dag)};
}

std::vector<CostEstimate> region_estimates(const PlanResult& plan, const CostModel& costs, const SimConfig& cfg,
                                           ChoicePolicy policy) {
    if (policy == ChoicePolicy::bottleneck) {
        std::vector<CostEstimate> out;
        for (const std::string& rid : plan.schedule.order) {
            out.push_back(bottleneck_estimate(plan.dag, plan.graph.region(rid), costs,
                                              MatCosts{cfg.writer_cost, cfg.reader_cost}, cfg.d_target));
        }
        return out;
    }
    return estimate_plan(plan, costs, cfg).regions;
}

ChoiceEvaluation evaluate_choice(const PlanState& state, const ConflictContext& ctx,
                                 const MaterializationChoice& choice, const CostModel& costs,
                                 const SimConfig& cfg, ChoicePolicy policy) {
    ChoiceEvaluation ev;
    ev.index = choice.index;
    ev.cut = choice.cut;
    Cardinalities card = propagate_cardinalities(state.dag, costs, MatCosts{cfg.writer_cost, cfg.reader_cost});
    for (const std::string& l : choice.cut) ev.materialized_tuples += static_cast<double>(card.links.at(l));
    if (policy != ChoicePolicy::simulate && policy != ChoicePolicy::bottleneck) return ev;

    const std::string result = single_result_operator(state.dag);
    ev.result_in_split_region = state.graph.region(ctx.r_o).contains(result);

    Candidate cand = complete_candidate(state, ctx, choice);
    ev.breakdown = region_estimates(cand.plan, costs, cfg, policy);

    // Regions are matched by source: later conflicts may rename them.
    std::set<std::string> reader_sources;
    for (const std::string& l : choice.cut) reader_sources.insert(materialization_ids(l).reader);
    std::vector<std::size_t> readers;
    std::optional<std::size_t> writer;
    for (std::size_t i = 0; i < ev.breakdown.size(); ++i) {
        const std::string& source = cand.plan.graph.region(ev.breakdown[i].region).source;
        if (source == ctx.source_o) writer = i;
        if (reader_sources.count(source)) readers.push_back(i);
    }
    if (!writer || readers.empty()) return ev;
    auto is_split = [&](std::size_t i) {
        return i == *writer || std::find(readers.begin(), readers.end(), i) != readers.end();
    };

    double t_writer = ev.breakdown[*writer].t_full;
    if (ev.result_in_split_region) {
        std::size_t earliest = *std::min_element(readers.begin(), readers.end());
        double t_other = 0.0;
        for (std::size_t i = 0; i < earliest; ++i) {
            if (!is_split(i)) t_other += ev.breakdown[i].t_full;
        }
        std::optional<double> first;
        for (std::size_t i : readers) {
            const auto& t = ev.breakdown[i].t_first;
            if (t && (!first || *t < *first)) first = t;
        }
        ev.t_other = t_other;
        if (first) ev.tau_c = t_other + t_writer + *first;
    } else {
        std::optional<std::size_t> res;
        for (std::size_t i = 0; i < ev.breakdown.size() && !res; ++i) {
            if (!is_split(i) && ev.breakdown[i].t_first) res = i;
        }
        if (!res) return ev;
        double t_other = *ev.breakdown[*res].t_first;
        for (std::size_t i = 0; i < *res; ++i) {
            if (!is_split(i)) t_other += ev.breakdown[i].t_full;
        }
        double t_readers = 0.0;
        for (std::size_t i : readers) t_readers += ev.breakdown[i].t_full;
        ev.t_other = t_other;
        ev.tau_c = t_other + t_writer + t_readers;
    }
    return ev;
}

ChoiceDecision evaluate_and_choose(const PlanState& state, const ConflictContext& ctx,
                                   const std::vector<MaterializationChoice>& choices, const CostModel& costs,
                                   const SimConfig& cfg, ChoicePolicy policy) {
    if (choices.empty()) throw UnschedulableError("no materialization choice to evaluate");
    if (policy == ChoicePolicy::first) return ChoiceDecision{choices.front().index, {}};
    if (policy != ChoicePolicy::materialized_size) single_result_operator(state.dag);

    ChoiceDecision decision;
    for (const MaterializationChoice& c : choices) {
        decision.evaluations.push_back(evaluate_choice(state, ctx, c, costs, cfg, policy));
    }
    const ChoiceEvaluation* best = &decision.evaluations.front();
    for (const ChoiceEvaluation& ev : decision.evaluations) {
        if (better(ev, *best, policy)) best = &ev;
    }
    decision.chosen = best->index;
    return decision;
}

Chooser make_chooser(ChoicePolicy policy, const CostModel& costs, const SimConfig& cfg) {
    return [policy, costs, cfg](const PlanState& state, const ConflictContext& ctx,
                                const std::vector<MaterializationChoice>& choices) {
        return evaluate_and_choose(state, ctx, choices, costs, cfg, policy);
    };
}

PlannerOptions planner_options(ChoicePolicy policy, const std::optional<CostModel>& costs, const SimConfig& cfg) {
    PlannerOptions options;
    options.policy_name = std::string(to_string(policy));
    if (policy == ChoicePolicy::first) return options;
    if (!costs) throw CostModelError("policy '" + options.policy_name + "' needs a cost model");
    options.chooser = make_chooser(policy, *costs, cfg);
    return options;
}

} // namespace regionplan
