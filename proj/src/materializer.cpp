#include "regionplan/materializer.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "regionplan/errors.hpp"

namespace regionplan {

namespace {

std::vector<bool> pipelined_forward(const WorkflowDag& dag, std::size_t start) {
    std::vector<bool> seen(dag.operator_count(), false);
    seen[start] = true;
    for (const std::string& id : dag.topological_order()) {
        std::size_t v = dag.operator_index(id);
        if (!seen[v]) continue;
        for (std::size_t li : dag.out_links(v)) {
            if (dag.links()[li].pipelined()) seen[dag.to_index(dag.links()[li])] = true;
        }
    }
    return seen;
}

std::vector<bool> pipelined_backward(const WorkflowDag& dag, const std::vector<std::size_t>& targets) {
    std::vector<bool> seen(dag.operator_count(), false);
    for (std::size_t t : targets) seen[t] = true;
    const auto& order = dag.topological_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        std::size_t v = dag.operator_index(*it);
        if (!seen[v]) continue;
        for (std::size_t li : dag.in_links(v)) {
            if (dag.links()[li].pipelined()) seen[dag.from_index(dag.links()[li])] = true;
        }
    }
    return seen;
}

// Pipelined links lying on some path from the forward set into the backward set.
std::vector<std::string> links_between(const WorkflowDag& dag, const std::vector<bool>& fwd,
                                       const std::vector<bool>& bwd) {
    std::vector<std::string> out;
    for (const LinkSpec& l : dag.links()) {
        if (l.pipelined() && fwd[dag.from_index(l)] && bwd[dag.to_index(l)]) out.push_back(l.id);
    }
    return out;
}

std::string next_on_cycle(const RegionGraph& graph, const std::string& r_o, const std::string& r_u) {
    if (r_o == r_u) return r_o;
    std::map<std::string, std::vector<std::string>> next;
    for (const RegionEdge& e : graph.edges) next[e.from].push_back(e.to);
    for (auto& [from, targets] : next) {
        std::sort(targets.begin(), targets.end(), natural_less);
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    }
    // BFS from r_o; remember the first hop that led to each region.
    std::map<std::string, std::string> first_hop;
    std::deque<std::string> queue;
    for (const std::string& w : next[r_o]) {
        if (!first_hop.count(w)) {
            first_hop[w] = w;
            queue.push_back(w);
        }
    }
    while (!queue.empty()) {
        std::string v = queue.front();
        queue.pop_front();
        if (v == r_u) return first_hop[v];
        for (const std::string& w : next[v]) {
            if (!first_hop.count(w)) {
                first_hop[w] = first_hop[v];
                queue.push_back(w);
            }
        }
    }
    throw UnschedulableError("no region path from " + r_o + " to " + r_u + "; edge would not close a cycle");
}

} // namespace

ConflictContext build_conflict_context(const WorkflowDag& dag, const RegionGraph& graph,
                                       const std::string& conflict_op, const std::string& blocking_link,
                                       const std::string& r_u, const std::string& r_o) {
    ConflictContext ctx;
    ctx.conflict_op = conflict_op;
    ctx.blocking_link = blocking_link;
    ctx.r_u = r_u;
    ctx.r_o = r_o;
    ctx.r_m = next_on_cycle(graph, r_o, r_u);

    const Region& ro = graph.region(r_o);
    ctx.source_o = ro.source;

    std::vector<bool> from_source = pipelined_forward(dag, dag.operator_index(ro.source));
    std::vector<bool> to_conflict = pipelined_backward(dag, {dag.operator_index(conflict_op)});
    ctx.g_o = links_between(dag, from_source, to_conflict);

    // Operators of r_o feeding the blocking links that carry the cycle edge
    // r_o -> r_m; on a self-loop that is the pending link itself.
    std::vector<std::size_t> blocking_feeders;
    if (r_u == r_o) {
        blocking_feeders.push_back(dag.from_index(dag.link(blocking_link)));
    } else {
        for (const RegionEdge& e : graph.edges) {
            if (e.from == r_o && e.to == ctx.r_m) blocking_feeders.push_back(dag.from_index(dag.link(e.via_link)));
        }
    }
    std::vector<bool> to_feeders = pipelined_backward(dag, blocking_feeders);
    ctx.g_m = links_between(dag, from_source, to_feeders);

    std::set<std::string> gm(ctx.g_m.begin(), ctx.g_m.end());
    for (const std::string& id : ctx.g_o) {
        if (!gm.count(id)) ctx.g_f.push_back(id);
    }
    if (ctx.g_f.empty()) {
        throw EmptyCutSpace("no link of the pipelined supply to '" + conflict_op +
                            "' can be cut without also cutting the blocking supply of region " + ctx.r_m);
    }

    std::set<std::string> boundary;
    for (const std::string& id : ctx.g_f) {
        const LinkSpec& l = dag.link(id);
        std::size_t v = dag.from_index(l);
        if (from_source[v] && to_feeders[v]) boundary.insert(l.from);
    }
    ctx.boundary.assign(boundary.begin(), boundary.end());
    return ctx;
}

ContextCutProblem make_cut_problem(const WorkflowDag& dag, const ConflictContext& ctx) {
    ContextCutProblem out;
    out.link_ids = ctx.g_f;
    const auto& rank = dag.topological_rank();
    std::sort(out.link_ids.begin(), out.link_ids.end(), [&](const std::string& a, const std::string& b) {
        const LinkSpec& la = dag.link(a);
        const LinkSpec& lb = dag.link(b);
        auto ka = std::tuple(rank[dag.from_index(la)], rank[dag.to_index(la)], la.id);
        auto kb = std::tuple(rank[dag.from_index(lb)], rank[dag.to_index(lb)], lb.id);
        return ka < kb;
    });
    out.problem.node_count = dag.operator_count();
    for (const std::string& id : out.link_ids) {
        const LinkSpec& l = dag.link(id);
        out.problem.edges.push_back({dag.from_index(l), dag.to_index(l)});
    }
    for (const std::string& p : ctx.boundary) out.problem.sources.push_back(dag.operator_index(p));
    out.problem.sources.push_back(dag.operator_index(ctx.source_o));
    out.problem.target = dag.operator_index(ctx.conflict_op);
    return out;
}

std::vector<MaterializationChoice> enumerate_choices(const WorkflowDag& dag, const ConflictContext& ctx,
                                                     std::size_t bound) {
    ContextCutProblem cp = make_cut_problem(dag, ctx);
    std::vector<MaterializationChoice> choices;
    for (const auto& cut : enumerate_minimal_cuts(cp.problem, bound)) {
        MaterializationChoice c;
        c.index = choices.size();
        for (std::size_t e : cut) c.cut.push_back(cp.link_ids[e]);
        choices.push_back(std::move(c));
    }
    return choices;
}

MaterializationIds materialization_ids(const std::string& link_id) {
    return {"mw_" + link_id, "mr_" + link_id, link_id + ".w", link_id + ".m", link_id + ".r"};
}

WorkflowDag apply_choice(const WorkflowDag& dag, const MaterializationChoice& choice) {
    std::set<std::string> cut;
    for (const std::string& id : choice.cut) {
        const LinkSpec& l = dag.link(id);  // throws UnknownLink
        if (!l.pipelined()) throw NotPipelined("link '" + id + "' is blocking and cannot be materialized");
        cut.insert(id);
    }
    if (cut.empty()) return dag;

    std::vector<OperatorSpec> ops = dag.operators();
    std::vector<LinkSpec> links;
    for (const LinkSpec& l : dag.links()) {
        if (!cut.count(l.id)) {
            links.push_back(l);
            continue;
        }
        MaterializationIds ids = materialization_ids(l.id);
        ops.push_back({ids.writer, "MW(" + l.id + ")", OperatorKind::mat_writer, false});
        ops.push_back({ids.reader, "MR(" + l.id + ")", OperatorKind::mat_reader, false});
        links.push_back({ids.to_writer, l.from, ids.writer, 0, LinkMode::pipelined});
        links.push_back({ids.writer_to_reader, ids.writer, ids.reader, 0, LinkMode::blocking});
        links.push_back({ids.reader_to_dest, ids.reader, l.to, l.to_port, LinkMode::pipelined});
    }
    return WorkflowDag::create(std::move(ops), std::move(links), {.allow_materialization_ops = true});
}

} // namespace regionplan
