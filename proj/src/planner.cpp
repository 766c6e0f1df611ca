#include "regionplan/planner.hpp"

#include <algorithm>
#include <map>

#include "regionplan/errors.hpp"

namespace regionplan {

namespace {

bool is_source(const WorkflowDag& dag, std::size_t v) {
    for (std::size_t li : dag.in_links(v)) {
        if (dag.links()[li].pipelined()) return false;
    }
    return true;
}

bool has_region_for(const RegionGraph& graph, const std::string& source) {
    return std::any_of(graph.regions.begin(), graph.regions.end(),
                       [&](const Region& r) { return r.source == source; });
}

// Does `from` reach `to` through region-graph edges (or are they equal)?
bool region_reaches(const RegionGraph& graph, const std::string& from, const std::string& to) {
    if (from == to) return true;
    std::map<std::string, std::vector<std::string>> next;
    for (const RegionEdge& e : graph.edges) next[e.from].push_back(e.to);
    std::set<std::string> seen{from};
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
        std::string v = stack.back();
        stack.pop_back();
        for (const std::string& w : next[v]) {
            if (w == to) return true;
            if (seen.insert(w).second) stack.push_back(w);
        }
    }
    return false;
}

std::vector<std::string> naturally_sorted(std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end(), natural_less);
    return ids;
}

// First (r_u, r_o) pair, in natural id order, whose edge would close a cycle.
std::optional<std::pair<std::string, std::string>> find_cycle_pair(const PlanState& state,
                                                                   const LinkSpec& link) {
    for (const std::string& ru : naturally_sorted(state.graph.regions_of(link.from))) {
        for (const std::string& ro : naturally_sorted(state.graph.regions_of(link.to))) {
            if (region_reaches(state.graph, ro, ru)) return std::pair(ru, ro);
        }
    }
    return std::nullopt;
}

void add_link_edges(RegionGraph& graph, const LinkSpec& link) {
    for (const std::string& ru : graph.regions_of(link.from)) {
        for (const std::string& ro : graph.regions_of(link.to)) {
            RegionEdge e{ru, ro, link.id};
            if (std::find(graph.edges.begin(), graph.edges.end(), e) == graph.edges.end()) {
                graph.edges.push_back(std::move(e));
            }
        }
    }
    std::sort(graph.edges.begin(), graph.edges.end());
}

void recompute_edges(PlanState& state) {
    state.graph.edges.clear();
    for (const std::string& id : state.processed_links) {
        if (!state.dag.has_link(id)) continue;
        const LinkSpec& l = state.dag.link(id);
        for (const std::string& ru : state.graph.regions_of(l.from)) {
            for (const std::string& ro : state.graph.regions_of(l.to)) {
                state.graph.edges.push_back({ru, ro, l.id});
            }
        }
    }
    std::sort(state.graph.edges.begin(), state.graph.edges.end());
}

// A choice is feasible when the region graph stays acyclic and the pending
// blocking link no longer closes a cycle between the region of r_u's source
// and any region split off r_o. Other cycle pairs of the same link are left
// to the retry loop.
bool resolves_conflict(PlanState trial, const ConflictContext& ctx, const MaterializationChoice& choice) {
    const std::string source_u = trial.graph.region(ctx.r_u).source;
    apply_materialization(trial, ctx, choice);
    if (!is_acyclic(trial.graph)) return false;
    std::set<std::string> split_sources{ctx.source_o};
    for (const std::string& l : choice.cut) split_sources.insert(materialization_ids(l).reader);
    const LinkSpec& link = trial.dag.link(ctx.blocking_link);
    for (const std::string& ru : trial.graph.regions_of(link.from)) {
        if (trial.graph.region(ru).source != source_u) continue;
        for (const std::string& ro : trial.graph.regions_of(link.to)) {
            if (split_sources.count(trial.graph.region(ro).source) && region_reaches(trial.graph, ro, ru)) return false;
        }
    }
    return true;
}

void process_operator(PlanState& state, const PlannerOptions& options) {
    const std::string op = state.order[state.cursor];
    std::size_t v = state.dag.operator_index(op);
    if (is_source(state.dag, v) && !has_region_for(state.graph, op)) {
        state.graph.regions.push_back(extract_region(state.dag, op, "r" + std::to_string(state.next_region++)));
    }

    // in_links are sorted by link id; materialization never touches blocking links.
    std::vector<std::string> blocking;
    for (std::size_t li : state.dag.in_links(v)) {
        const LinkSpec& l = state.dag.links()[li];
        if (l.blocking() && !state.processed_links.count(l.id)) blocking.push_back(l.id);
    }
    for (const std::string& b : blocking) {
        const std::size_t limit = state.dag.links().size() + 1;
        bool done = false;
        for (std::size_t attempt = 0; attempt <= limit && !done; ++attempt) {
            const LinkSpec link = state.dag.link(b);
            auto pair = find_cycle_pair(state, link);
            if (!pair) {
                add_link_edges(state.graph, link);
                state.processed_links.insert(b);
                done = true;
            } else {
                add_materialization(state, pair->first, pair->second, op, b, options);
            }
        }
        if (!done) {
            throw UnschedulableError("blocking link '" + b + "' into '" + op +
                                     "' still closes a cycle after repeated materialization");
        }
    }
}

} // namespace

PlanState start_plan(const WorkflowDag& dag) {
    PlanState state;
    state.dag = dag;
    state.order = dag.topological_order();
    return state;
}

void run_to_completion(PlanState& state, const PlannerOptions& options) {
    while (state.cursor < state.order.size()) {
        process_operator(state, options);
        ++state.cursor;
    }
}

PlanResult finish_plan(const PlanState& state) {
    PlanResult result{state.dag, state.graph, schedule(state.graph), state.log};
    return result;
}

PlanResult build_region_graph(const WorkflowDag& dag, const PlannerOptions& options) {
    PlanState state = start_plan(dag);
    run_to_completion(state, options);
    return finish_plan(state);
}

SplitResult apply_materialization(PlanState& state, const ConflictContext& ctx,
                                  const MaterializationChoice& choice) {
    SplitResult split;
    WorkflowDag next = apply_choice(state.dag, choice);

    std::vector<Region> regions;
    for (const Region& r : state.graph.regions) {
        Region fresh = extract_region(next, r.source, r.id);
        if (fresh.members != r.members) {
            split.broken_regions.push_back(r.id);
            fresh.id = r.id + "_1";
            split.writer_regions.push_back(fresh.id);
            if (r.source == ctx.source_o) split.primary_writer = fresh.id;
        }
        regions.push_back(std::move(fresh));
    }

    auto id_taken = [&](const std::string& id) {
        return std::any_of(regions.begin(), regions.end(), [&](const Region& r) { return r.id == id; });
    };
    int suffix = 2;
    for (const std::string& link_id : choice.cut) {
        MaterializationIds ids = materialization_ids(link_id);
        std::string region_id;
        do {
            region_id = ctx.r_o + "_" + std::to_string(suffix++);
        } while (id_taken(region_id));
        regions.push_back(extract_region(next, ids.reader, region_id));
        split.reader_regions.push_back(region_id);
        split.inserted_operators.push_back(ids.writer);
        split.inserted_operators.push_back(ids.reader);
        split.inserted_links.push_back(ids.to_writer);
        split.inserted_links.push_back(ids.writer_to_reader);
        split.inserted_links.push_back(ids.reader_to_dest);
        state.processed_links.insert(ids.writer_to_reader);
    }
    if (split.primary_writer.empty()) {
        for (const Region& r : regions) {
            if (r.source == ctx.source_o) split.primary_writer = r.id;
        }
    }

    state.dag = std::move(next);
    state.graph.regions = std::move(regions);
    recompute_edges(state);
    return split;
}

void add_materialization(PlanState& state, const std::string& r_u, const std::string& r_o,
                         const std::string& conflict_op, const std::string& blocking_link,
                         const PlannerOptions& options) {
    ConflictContext ctx = build_conflict_context(state.dag, state.graph, conflict_op, blocking_link, r_u, r_o);
    std::vector<MaterializationChoice> choices = enumerate_choices(state.dag, ctx, options.cut_bound);

    MaterializationLogEntry entry;
    entry.context = ctx;
    entry.choices = choices;
    entry.policy = options.policy_name;
    std::vector<MaterializationChoice> feasible;
    for (const MaterializationChoice& c : choices) {
        bool ok = !c.cut.empty() && resolves_conflict(state, ctx, c);
        entry.feasible.push_back(ok);
        if (ok) feasible.push_back(c);
    }
    if (feasible.empty()) {
        throw UnschedulableError("none of the " + std::to_string(choices.size()) +
                                 " materialization choices for '" + conflict_op + "' yields an acyclic region graph");
    }

    ChoiceDecision decision{feasible.front().index, {}};
    if (options.chooser) decision = options.chooser(state, ctx, feasible);
    auto chosen = std::find_if(feasible.begin(), feasible.end(),
                               [&](const MaterializationChoice& c) { return c.index == decision.chosen; });
    if (chosen == feasible.end()) {
        throw UnschedulableError("chooser selected a choice that is not feasible");
    }

    SplitResult split = apply_materialization(state, ctx, *chosen);
    entry.evaluations = std::move(decision.evaluations);
    entry.chosen = chosen->index;
    entry.inserted_operators = split.inserted_operators;
    entry.inserted_links = split.inserted_links;
    entry.broken_regions = split.broken_regions;
    entry.writer_regions = split.writer_regions;
    entry.reader_regions = split.reader_regions;
    state.log.entries.push_back(std::move(entry));
}

Candidate complete_candidate(const PlanState& state, const ConflictContext& ctx,
                             const MaterializationChoice& choice) {
    PlanState copy = state;
    Candidate out{PlanResult{}, apply_materialization(copy, ctx, choice)};
    run_to_completion(copy, PlannerOptions{});
    out.plan = finish_plan(copy);
    return out;
}

} // namespace regionplan
