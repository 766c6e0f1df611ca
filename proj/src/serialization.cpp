#include "regionplan/serialization.hpp"

#include <cmath>
#include <cstdio>

#include "regionplan/errors.hpp"

namespace regionplan {

using json = nlohmann::json;

namespace {

void write_value(std::string& out, const json& v, int depth) {
    auto indent = [&](int d) { out.append(static_cast<std::size_t>(2 * d), ' '); };
    switch (v.type()) {
        case json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            // nlohmann's default object type is a std::map, so items are key-sorted.
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                indent(depth + 1);
                out += json(it.key()).dump();
                out += ": ";
                write_value(out, it.value(), depth + 1);
            }
            out += "\n";
            indent(depth);
            out += "}";
            return;
        }
        case json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i > 0) out += ",\n";
                indent(depth + 1);
                write_value(out, v[i], depth + 1);
            }
            out += "\n";
            indent(depth);
            out += "]";
            return;
        }
        case json::value_t::number_float: {
            double d = v.get<double>();
            if (!std::isfinite(d)) {
                out += "null";
                return;
            }
            if (d == 0.0) d = 0.0;  // no "-0.000000"
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.6f", d);
            out += buf;
            return;
        }
        default:
            out += v.dump();
    }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json string_list(const std::vector<std::string>& v) { return json(v); }

} // namespace

std::string canonical_json(const json& value) {
    std::string out;
    write_value(out, value, 0);
    out += "\n";
    return out;
}

json workflow_to_json(const WorkflowDag& dag) { return json::parse(serialize_workflow(dag)); }

json region_graph_to_json(const RegionGraph& graph) {
    json doc;
    doc["regions"] = json::array();
    for (const Region& r : graph.regions) {
        doc["regions"].push_back({{"id", r.id}, {"source", r.source}, {"members", r.members}});
    }
    doc["edges"] = json::array();
    for (const RegionEdge& e : graph.edges) {
        doc["edges"].push_back({{"from", e.from}, {"to", e.to}, {"via_link", e.via_link}});
    }
    return doc;
}

RegionGraph region_graph_from_json(const json& doc) {
    RegionGraph graph;
    try {
        for (const json& r : doc.at("regions")) {
            graph.regions.push_back(Region{r.at("id").get<std::string>(), r.at("source").get<std::string>(),
                                           r.at("members").get<std::vector<std::string>>()});
        }
        for (const json& e : doc.at("edges")) {
            graph.edges.push_back(RegionEdge{e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                                             e.at("via_link").get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("region graph: ") + e.what());
    }
    return graph;
}

json context_to_json(const ConflictContext& ctx) {
    return {{"conflict_op", ctx.conflict_op}, {"blocking_link", ctx.blocking_link}, {"r_u", ctx.r_u},
            {"r_o", ctx.r_o},       {"r_m", ctx.r_m},       {"source_o", ctx.source_o},
            {"g_o", ctx.g_o},       {"g_m", ctx.g_m},       {"g_f", ctx.g_f},
            {"boundary", ctx.boundary}};
}

json estimate_to_json(const CostEstimate& est) {
    return {{"region", est.region}, {"t_full", est.t_full}, {"t_first", optional_number(est.t_first)}};
}

json evaluation_to_json(const ChoiceEvaluation& ev) {
    json breakdown = json::array();
    for (const CostEstimate& e : ev.breakdown) breakdown.push_back(estimate_to_json(e));
    return {{"index", ev.index},
            {"cut", string_list(ev.cut)},
            {"tau_c", optional_number(ev.tau_c)},
            {"t_other", optional_number(ev.t_other)},
            {"result_in_split_region", ev.result_in_split_region},
            {"materialized_tuples", ev.materialized_tuples},
            {"breakdown", breakdown}};
}

json log_to_json(const MaterializationLog& log) {
    json out = json::array();
    for (const MaterializationLogEntry& e : log.entries) {
        json choices = json::array();
        for (std::size_t i = 0; i < e.choices.size(); ++i) {
            choices.push_back({{"index", e.choices[i].index}, {"cut", e.choices[i].cut}, {"feasible", e.feasible[i]}});
        }
        json evaluations = json::array();
        for (const ChoiceEvaluation& ev : e.evaluations) evaluations.push_back(evaluation_to_json(ev));
        out.push_back({{"context", context_to_json(e.context)},
                       {"choices", choices},
                       {"evaluations", evaluations},
                       {"chosen", e.chosen},
                       {"policy", e.policy},
                       {"inserted_operators", e.inserted_operators},
                       {"inserted_links", e.inserted_links},
                       {"broken_regions", e.broken_regions},
                       {"writer_regions", e.writer_regions},
                       {"reader_regions", e.reader_regions}});
    }
    return out;
}

json choices_to_json(const MaterializationLog& log) {
    json out = json::array();
    for (const MaterializationLogEntry& e : log.entries) {
        json choices = json::array();
        for (std::size_t i = 0; i < e.choices.size(); ++i) {
            const MaterializationChoice& c = e.choices[i];
            std::optional<double> tau;
            for (const ChoiceEvaluation& ev : e.evaluations) {
                if (ev.index == c.index) tau = ev.tau_c;
            }
            choices.push_back({{"index", c.index}, {"cut", c.cut}, {"feasible", e.feasible[i]},
                               {"tau_c", optional_number(tau)}});
        }
        out.push_back({{"conflict_op", e.context.conflict_op},
                       {"blocking_link", e.context.blocking_link},
                       {"r_u", e.context.r_u},
                       {"r_o", e.context.r_o},
                       {"r_m", e.context.r_m},
                       {"g_f", e.context.g_f},
                       {"boundary", e.context.boundary},
                       {"chosen", e.chosen},
                       {"choices", choices}});
    }
    return out;
}

json plan_bundle_to_json(const PlanResult& plan, const PlanBundleInfo& info) {
    json evaluations = json::array();
    for (const MaterializationLogEntry& e : plan.log.entries) {
        for (const ChoiceEvaluation& ev : e.evaluations) {
            json item = evaluation_to_json(ev);
            item["conflict_op"] = e.context.conflict_op;
            evaluations.push_back(std::move(item));
        }
    }
    return {{"workflow", workflow_to_json(plan.dag)},
            {"region_graph", region_graph_to_json(plan.graph)},
            {"schedule", plan.schedule.order},
            {"materialization_log", log_to_json(plan.log)},
            {"evaluations", evaluations},
            {"policy", info.policy},
            {"first_k", info.first_k},
            {"cores", info.cores ? json(*info.cores) : json(nullptr)}};
}

PlanResult plan_bundle_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed plan JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("workflow") || !doc.contains("region_graph") || !doc.contains("schedule")) {
        throw SchemaError("plan: needs fields 'workflow', 'region_graph' and 'schedule'");
    }
    PlanResult plan;
    plan.dag = parse_workflow(doc["workflow"].dump(), WorkflowOptions{true});
    plan.graph = region_graph_from_json(doc["region_graph"]);
    try {
        plan.schedule.order = doc["schedule"].get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("plan schedule: ") + e.what());
    }
    return plan;
}

json sim_report_to_json(const SimReport& report, const std::vector<CostEstimate>& regions) {
    json regs = json::array();
    for (std::size_t i = 0; i < report.regions.size(); ++i) {
        const RegionTiming& rt = report.regions[i];
        json r = {{"id", rt.id}, {"start", rt.start}, {"end", rt.end}};
        if (i < regions.size()) {
            r["t_full"] = regions[i].t_full;
            r["t_first"] = optional_number(regions[i].t_first);
        }
        regs.push_back(std::move(r));
    }
    json firsts = json::object();
    for (const auto& [op, times] : report.first_output_times) firsts[op] = times;
    json links = json::object();
    for (const auto& [id, n] : report.link_tuples) links[id] = n;
    json mat = json::object();
    for (const auto& [id, n] : report.materialized_tuples) mat[id] = n;
    return {{"regions", regs},
            {"first_output_times", firsts},
            {"link_tuples", links},
            {"materialized_tuples", mat},
            {"tau", optional_number(report.tau)},
            {"total_time", report.total_time},
            {"first_k", report.d_target},
            {"cores", report.cores ? json(*report.cores) : json(nullptr)}};
}

} // namespace regionplan
