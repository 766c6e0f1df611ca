#include "regionplan/workflow.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "regionplan/errors.hpp"

namespace regionplan {

namespace {

constexpr std::pair<OperatorKind, std::string_view> kKindNames[] = {
    {OperatorKind::scan, "scan"},
    {OperatorKind::transform, "transform"},
    {OperatorKind::replicate, "replicate"},
    {OperatorKind::merge, "merge"},
    {OperatorKind::join_probe_build, "join-probe-build"},
    {OperatorKind::result, "result"},
    {OperatorKind::mat_writer, "mat-writer"},
    {OperatorKind::mat_reader, "mat-reader"},
};

using json = nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError(where + ": missing field '" + key + "'");
    }
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string()) {
        throw SchemaError(where + ": field '" + key + "' must be a string");
    }
    return v.get<std::string>();
}

} // namespace

std::string_view to_string(OperatorKind kind) {
    for (auto [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "transform";
}

std::string_view to_string(LinkMode mode) {
    return mode == LinkMode::blocking ? "blocking" : "pipelined";
}

std::optional<OperatorKind> parse_operator_kind(std::string_view text) {
    for (auto [k, name] : kKindNames) {
        if (name == text) return k;
    }
    return std::nullopt;
}

std::optional<LinkMode> parse_link_mode(std::string_view text) {
    if (text == "blocking") return LinkMode::blocking;
    if (text == "pipelined") return LinkMode::pipelined;
    return std::nullopt;
}

WorkflowDag WorkflowDag::create(std::vector<OperatorSpec> operators, std::vector<LinkSpec> links,
                                WorkflowOptions options) {
    WorkflowDag dag;
    std::sort(operators.begin(), operators.end(),
              [](const OperatorSpec& a, const OperatorSpec& b) { return a.id < b.id; });
    std::sort(links.begin(), links.end(),
              [](const LinkSpec& a, const LinkSpec& b) { return a.id < b.id; });

    for (std::size_t i = 0; i < operators.size(); ++i) {
        const OperatorSpec& op = operators[i];
        if (op.id.empty()) throw ValidationError("operator with empty id");
        if (!dag.op_index_.emplace(op.id, i).second) {
            throw ValidationError("duplicate id: operator '" + op.id + "'");
        }
        if (op.is_materialization() && !options.allow_materialization_ops) {
            throw ValidationError("operator '" + op.id + "' has kind " +
                                  std::string(to_string(op.kind)) +
                                  ", which only the planner may insert");
        }
    }
    std::set<std::pair<std::string, int>> ports;
    for (std::size_t i = 0; i < links.size(); ++i) {
        const LinkSpec& l = links[i];
        if (l.id.empty()) throw ValidationError("link with empty id");
        if (!dag.link_index_.emplace(l.id, i).second) {
            throw ValidationError("duplicate id: link '" + l.id + "'");
        }
        if (!dag.op_index_.count(l.from) || !dag.op_index_.count(l.to)) {
            throw ValidationError("dangling link '" + l.id + "' (" + l.from + " -> " + l.to + ")");
        }
        if (l.from == l.to) {
            throw ValidationError("self link '" + l.id + "' on operator '" + l.from + "'");
        }
        if (l.to_port < 0) {
            throw ValidationError("link '" + l.id + "' has negative to_port");
        }
        if (!ports.emplace(l.to, l.to_port).second) {
            throw ValidationError("duplicate input port " + std::to_string(l.to_port) +
                                  " on operator '" + l.to + "'");
        }
    }

    dag.operators_ = std::move(operators);
    dag.links_ = std::move(links);
    const std::size_t n = dag.operators_.size();
    dag.in_.assign(n, {});
    dag.out_.assign(n, {});
    for (std::size_t i = 0; i < dag.links_.size(); ++i) {
        dag.out_[dag.op_index_.at(dag.links_[i].from)].push_back(i);
        dag.in_[dag.op_index_.at(dag.links_[i].to)].push_back(i);
    }

    bool any_scan = false;
    for (std::size_t i = 0; i < n; ++i) {
        const OperatorSpec& op = dag.operators_[i];
        if (op.kind == OperatorKind::scan) {
            any_scan = true;
            if (!dag.in_[i].empty()) throw ValidationError("scan with inputs: '" + op.id + "'");
        }
        if ((op.is_result || op.kind == OperatorKind::result) && !dag.out_[i].empty()) {
            throw ValidationError("result with outputs: '" + op.id + "'");
        }
    }
    if (!any_scan) throw ValidationError("workflow has no scan operator");

    // Kahn with a min-id heap; ids sort the same way as indices.
    std::vector<std::size_t> indegree(n);
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i) {
        indegree[i] = dag.in_[i].size();
        if (indegree[i] == 0) ready.push(i);
    }
    dag.topo_rank_.assign(n, 0);
    while (!ready.empty()) {
        std::size_t v = ready.top();
        ready.pop();
        dag.topo_rank_[v] = dag.topo_.size();
        dag.topo_.push_back(dag.operators_[v].id);
        for (std::size_t li : dag.out_[v]) {
            std::size_t w = dag.op_index_.at(dag.links_[li].to);
            if (--indegree[w] == 0) ready.push(w);
        }
    }
    if (dag.topo_.size() != n) throw ValidationError("cyclic workflow");

    std::vector<bool> reached(n, false);
    for (const std::string& id : dag.topo_) {
        std::size_t v = dag.op_index_.at(id);
        if (dag.operators_[v].kind == OperatorKind::scan) reached[v] = true;
        if (!reached[v]) {
            throw ValidationError("operator '" + id + "' is unreachable from every scan");
        }
        for (std::size_t li : dag.out_[v]) reached[dag.op_index_.at(dag.links_[li].to)] = true;
    }
    return dag;
}

bool WorkflowDag::has_operator(std::string_view id) const { return op_index_.find(id) != op_index_.end(); }
bool WorkflowDag::has_link(std::string_view id) const { return link_index_.find(id) != link_index_.end(); }

std::size_t WorkflowDag::operator_index(std::string_view id) const {
    auto it = op_index_.find(id);
    if (it == op_index_.end()) throw ValidationError("unknown operator '" + std::string(id) + "'");
    return it->second;
}

std::size_t WorkflowDag::link_index(std::string_view id) const {
    auto it = link_index_.find(id);
    if (it == link_index_.end()) throw UnknownLink("unknown link '" + std::string(id) + "'");
    return it->second;
}

WorkflowDag parse_workflow(std::string_view text, WorkflowOptions options) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("workflow document must be a JSON object");
    const json& ops = require(doc, "operators", "workflow");
    const json& links = require(doc, "links", "workflow");
    if (!ops.is_array()) throw SchemaError("workflow: 'operators' must be an array");
    if (!links.is_array()) throw SchemaError("workflow: 'links' must be an array");

    std::vector<OperatorSpec> operators;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const json& o = ops[i];
        std::string where = "operators[" + std::to_string(i) + "]";
        if (!o.is_object()) throw SchemaError(where + " must be an object");
        OperatorSpec spec;
        spec.id = require_string(o, "id", where);
        spec.label = require_string(o, "label", where);
        std::string kind = require_string(o, "kind", where);
        auto k = parse_operator_kind(kind);
        if (!k) throw SchemaError(where + ": unknown kind '" + kind + "'");
        spec.kind = *k;
        const json& r = require(o, "is_result", where);
        if (!r.is_boolean()) throw SchemaError(where + ": field 'is_result' must be a boolean");
        spec.is_result = r.get<bool>();
        operators.push_back(std::move(spec));
    }

    std::vector<LinkSpec> parsed_links;
    for (std::size_t i = 0; i < links.size(); ++i) {
        const json& l = links[i];
        std::string where = "links[" + std::to_string(i) + "]";
        if (!l.is_object()) throw SchemaError(where + " must be an object");
        LinkSpec spec;
        spec.id = require_string(l, "id", where);
        spec.from = require_string(l, "from", where);
        spec.to = require_string(l, "to", where);
        const json& port = require(l, "to_port", where);
        if (!port.is_number_integer()) throw SchemaError(where + ": field 'to_port' must be an integer");
        spec.to_port = port.get<int>();
        std::string mode = require_string(l, "mode", where);
        auto m = parse_link_mode(mode);
        if (!m) throw SchemaError(where + ": mode must be \"blocking\" or \"pipelined\"");
        spec.mode = *m;
        parsed_links.push_back(std::move(spec));
    }
    return WorkflowDag::create(std::move(operators), std::move(parsed_links), options);
}

std::string serialize_workflow(const WorkflowDag& dag) {
    json doc;
    doc["operators"] = json::array();
    for (const OperatorSpec& op : dag.operators()) {
        doc["operators"].push_back({{"id", op.id},
                                    {"label", op.label},
                                    {"kind", std::string(to_string(op.kind))},
                                    {"is_result", op.is_result}});
    }
    doc["links"] = json::array();
    for (const LinkSpec& l : dag.links()) {
        doc["links"].push_back({{"id", l.id},
                                {"from", l.from},
                                {"to", l.to},
                                {"to_port", l.to_port},
                                {"mode", std::string(to_string(l.mode))}});
    }
    return doc.dump(2) + "\n";
}

std::vector<std::string> topological_order(const WorkflowDag& dag) { return dag.topological_order(); }

namespace {

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

std::string export_dot(const WorkflowDag& dag) {
    std::ostringstream os;
    os << "digraph workflow {\n";
    os << "  rankdir=LR;\n";
    for (const OperatorSpec& op : dag.operators()) {
        os << "  " << dot_quote(op.id) << " [label=" << dot_quote(op.label.empty() ? op.id : op.label);
        if (op.is_result) os << ", shape=box";
        if (op.is_materialization()) os << ", style=dashed";
        os << "];\n";
    }
    for (const LinkSpec& l : dag.links()) {
        os << "  " << dot_quote(l.from) << " -> " << dot_quote(l.to) << " [label=" << dot_quote(l.id);
        if (l.blocking()) os << ", color=\"red\"";
        os << "];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace regionplan
