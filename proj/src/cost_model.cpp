#include "regionplan/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <json.hpp>

#include "regionplan/errors.hpp"

namespace regionplan {

using json = nlohmann::json;

namespace {

double number_field(const json& obj, const char* key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw SchemaError(where + ": field '" + key + "' must be a number");
    return v.get<double>();
}

} // namespace

CostModel parse_cost_model(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed cost model JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("operators") || !doc["operators"].is_object()) {
        throw SchemaError("cost model: missing object field 'operators'");
    }
    CostModel model;
    for (auto& [id, entry] : doc["operators"].items()) {
        std::string where = "cost model operator '" + id + "'";
        if (!entry.is_object()) throw SchemaError(where + " must be an object");
        OperatorCost c;
        if (!entry.contains("per_tuple_cost")) throw SchemaError(where + ": missing field 'per_tuple_cost'");
        c.per_tuple_cost = number_field(entry, "per_tuple_cost", where);
        if (entry.contains("selectivity")) c.selectivity = number_field(entry, "selectivity", where);
        if (entry.contains("scan_cardinality")) {
            const json& n = entry["scan_cardinality"];
            if (!n.is_number_integer() || n.get<std::int64_t>() < 0) {
                throw SchemaError(where + ": 'scan_cardinality' must be a non-negative integer");
            }
            c.scan_cardinality = n.get<std::uint64_t>();
        }
        if (entry.contains("blocking_input_cost")) {
            c.blocking_input_cost = number_field(entry, "blocking_input_cost", where);
        }
        if (c.per_tuple_cost < 0 || (c.blocking_input_cost && *c.blocking_input_cost < 0)) {
            throw CostModelError(where + ": costs must be non-negative");
        }
        if (!(c.selectivity > 0)) throw CostModelError(where + ": selectivity must be positive");
        model.operators.emplace(id, c);
    }
    if (doc.contains("machine")) {
        const json& m = doc["machine"];
        if (!m.is_object()) throw SchemaError("cost model: 'machine' must be an object");
        if (m.contains("cores") && !m["cores"].is_null()) {
            if (!m["cores"].is_number_integer() || m["cores"].get<int>() < 1) {
                throw CostModelError("cost model: machine.cores must be a positive integer");
            }
            model.cores = m["cores"].get<int>();
        }
    }
    return model;
}

std::vector<ResolvedCost> resolve_costs(const WorkflowDag& dag, const CostModel& costs, MatCosts mat) {
    std::vector<ResolvedCost> out;
    out.reserve(dag.operator_count());
    for (const OperatorSpec& op : dag.operators()) {
        ResolvedCost r;
        auto it = costs.operators.find(op.id);
        if (it == costs.operators.end()) {
            if (!op.is_materialization()) throw MissingCost("no cost entry for operator '" + op.id + "'");
            r.per_tuple_cost = op.kind == OperatorKind::mat_writer ? mat.writer : mat.reader;
            r.blocking_input_cost = op.kind == OperatorKind::mat_writer ? r.per_tuple_cost : 0.0;
            out.push_back(r);
            continue;
        }
        const OperatorCost& c = it->second;
        if ((op.kind == OperatorKind::scan) != c.scan_cardinality.has_value()) {
            throw CostModelError("operator '" + op.id + "': scan_cardinality must be given exactly for scans");
        }
        r.per_tuple_cost = c.per_tuple_cost;
        r.selectivity = op.is_materialization() ? 1.0 : c.selectivity;
        r.scan_cardinality = c.scan_cardinality.value_or(0);
        r.blocking_input_cost = c.blocking_input_cost.value_or(
            op.kind == OperatorKind::mat_reader ? 0.0 : c.per_tuple_cost);
        out.push_back(r);
    }
    return out;
}

std::uint64_t emitted_after(std::uint64_t consumed, double selectivity) {
    // The epsilon keeps products such as 0.29 * 100 on the intended integer.
    return static_cast<std::uint64_t>(std::floor(static_cast<double>(consumed) * selectivity + 1e-9));
}

std::optional<std::uint64_t> inputs_for_outputs(std::uint64_t need, double selectivity) {
    if (need == 0) return 0;
    if (!(selectivity > 0)) return std::nullopt;
    auto k = static_cast<std::uint64_t>(std::ceil(static_cast<double>(need) / selectivity));
    while (k > 0 && emitted_after(k - 1, selectivity) >= need) --k;
    while (emitted_after(k, selectivity) < need) ++k;
    return k;
}

Cardinalities propagate_cardinalities(const WorkflowDag& dag, const CostModel& costs, MatCosts mat) {
    std::vector<ResolvedCost> rc = resolve_costs(dag, costs, mat);
    Cardinalities card;
    for (const std::string& id : dag.topological_order()) {
        std::size_t v = dag.operator_index(id);
        const OperatorSpec& op = dag.operators()[v];
        std::uint64_t in = 0;
        for (std::size_t li : dag.in_links(v)) in += card.links.at(dag.links()[li].id);
        std::uint64_t out = op.kind == OperatorKind::scan ? rc[v].scan_cardinality
                                                          : emitted_after(in, rc[v].selectivity);
        card.consumed[id] = in;
        card.produced[id] = out;
        for (std::size_t li : dag.out_links(v)) card.links[dag.links()[li].id] = out;
    }
    return card;
}

CostEstimate bottleneck_estimate(const WorkflowDag& dag, const Region& region, const CostModel& costs,
                                 MatCosts mat, std::uint64_t d) {
    std::vector<ResolvedCost> rc = resolve_costs(dag, costs, mat);
    Cardinalities card = propagate_cardinalities(dag, costs, mat);
    const std::size_t n = dag.operator_count();
    std::vector<bool> member(n, false);
    for (const std::string& m : region.members) member[dag.operator_index(m)] = true;
    const std::size_t src = dag.operator_index(region.source);

    auto blocking_in = [&](std::size_t v) {
        std::uint64_t total = 0;
        for (std::size_t li : dag.in_links(v)) {
            if (dag.links()[li].blocking()) total += card.links.at(dag.links()[li].id);
        }
        return total;
    };

    // Tuples flowing inside this region's window.
    std::vector<std::uint64_t> in_r(n, 0), out_r(n, 0);
    std::vector<double> work(n, 0.0);
    for (const std::string& id : region.members) {
        std::size_t v = dag.operator_index(id);
        const OperatorSpec& op = dag.operators()[v];
        if (v == src) {
            if (op.kind == OperatorKind::scan || op.kind == OperatorKind::mat_reader) {
                std::uint64_t ticks = op.kind == OperatorKind::scan ? rc[v].scan_cardinality : card.consumed.at(id);
                work[v] += static_cast<double>(ticks) * rc[v].per_tuple_cost;
                out_r[v] = ticks;
            } else {
                out_r[v] = card.produced.at(id);
            }
            continue;
        }
        for (std::size_t li : dag.in_links(v)) {
            const LinkSpec& l = dag.links()[li];
            if (l.pipelined() && member[dag.from_index(l)]) in_r[v] += out_r[dag.from_index(l)];
        }
        work[v] += static_cast<double>(in_r[v]) * rc[v].per_tuple_cost;
        out_r[v] = emitted_after(in_r[v] + blocking_in(v), rc[v].selectivity);
    }
    // Blocking consumers are charged to the producing window.
    for (const std::string& id : region.members) {
        std::size_t v = dag.operator_index(id);
        for (std::size_t li : dag.out_links(v)) {
            const LinkSpec& l = dag.links()[li];
            if (l.blocking()) {
                std::size_t w = dag.to_index(l);
                work[w] += static_cast<double>(out_r[v]) * rc[w].blocking_input_cost;
            }
        }
    }

    CostEstimate est;
    est.region = region.id;
    est.t_full = *std::max_element(work.begin(), work.end());

    // Cheapest backward path: cost(v, need) = own work for `need` outputs plus
    // the cheapest upstream supply of the inputs that requires.
    std::map<std::pair<std::size_t, std::uint64_t>, std::optional<double>> memo;
    std::function<std::optional<double>(std::size_t, std::uint64_t)> cost_for =
        [&](std::size_t v, std::uint64_t need) -> std::optional<double> {
        auto key = std::pair(v, need);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        std::optional<double> best;
        const OperatorSpec& op = dag.operators()[v];
        if (v == src) {
            if (op.kind == OperatorKind::scan || op.kind == OperatorKind::mat_reader) {
                if (need <= out_r[v]) best = static_cast<double>(need) * rc[v].per_tuple_cost;
            } else if (need <= out_r[v]) {
                best = 0.0;
            }
        } else if (auto k = inputs_for_outputs(need, rc[v].selectivity)) {
            std::uint64_t held = blocking_in(v);
            std::uint64_t fresh = *k > held ? *k - held : 0;
            double own = static_cast<double>(fresh) * rc[v].per_tuple_cost;
            if (fresh == 0) {
                best = own;
            } else {
                for (std::size_t li : dag.in_links(v)) {
                    const LinkSpec& l = dag.links()[li];
                    if (!l.pipelined() || !member[dag.from_index(l)]) continue;
                    if (auto up = cost_for(dag.from_index(l), fresh)) {
                        if (!best || own + *up < *best) best = own + *up;
                    }
                }
            }
        }
        memo[key] = best;
        return best;
    };
    for (const std::string& id : region.members) {
        std::size_t v = dag.operator_index(id);
        if (!dag.operators()[v].is_result) continue;
        if (auto t = cost_for(v, d)) {
            if (!est.t_first || *t < *est.t_first) est.t_first = t;
        }
    }
    return est;
}

CostModel scale_costs(const CostModel& costs, double factor) {
    CostModel out = costs;
    for (auto& [id, c] : out.operators) {
        c.per_tuple_cost *= factor;
        if (c.blocking_input_cost) *c.blocking_input_cost *= factor;
    }
    return out;
}

} // namespace regionplan
