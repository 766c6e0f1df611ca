#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace regionplan {

enum class OperatorKind {
    scan,
    transform,
    replicate,
    merge,
    join_probe_build,
    result,
    mat_writer,
    mat_reader,
};

enum class LinkMode { blocking, pipelined };

std::string_view to_string(OperatorKind kind);
std::string_view to_string(LinkMode mode);
std::optional<OperatorKind> parse_operator_kind(std::string_view text);
std::optional<LinkMode> parse_link_mode(std::string_view text);

struct OperatorSpec {
    std::string id;
    std::string label;
    OperatorKind kind = OperatorKind::transform;
    bool is_result = false;

    bool is_materialization() const {
        return kind == OperatorKind::mat_writer || kind == OperatorKind::mat_reader;
    }
    friend bool operator==(const OperatorSpec&, const OperatorSpec&) = default;
};

struct LinkSpec {
    std::string id;
    std::string from;
    std::string to;
    int to_port = 0;
    LinkMode mode = LinkMode::pipelined;

    bool blocking() const { return mode == LinkMode::blocking; }
    bool pipelined() const { return mode == LinkMode::pipelined; }
    friend bool operator==(const LinkSpec&, const LinkSpec&) = default;
};

struct WorkflowOptions {
    /// Planner output may carry mat-writer/mat-reader pairs; user input may not.
    bool allow_materialization_ops = false;
};

/// A validated, immutable workflow DAG. Operators and links are stored sorted
/// by id, and all adjacency lists are sorted by link id.
class WorkflowDag {
public:
    /// Validates every structural invariant; throws ValidationError.
    static WorkflowDag create(std::vector<OperatorSpec> operators, std::vector<LinkSpec> links,
                              WorkflowOptions options = {});

    const std::vector<OperatorSpec>& operators() const { return operators_; }
    const std::vector<LinkSpec>& links() const { return links_; }
    std::size_t operator_count() const { return operators_.size(); }

    bool has_operator(std::string_view id) const;
    bool has_link(std::string_view id) const;
    std::size_t operator_index(std::string_view id) const;
    std::size_t link_index(std::string_view id) const;
    const OperatorSpec& op(std::string_view id) const { return operators_[operator_index(id)]; }
    const LinkSpec& link(std::string_view id) const { return links_[link_index(id)]; }

    /// Link indices, ordered by link id.
    const std::vector<std::size_t>& in_links(std::size_t op_index) const { return in_[op_index]; }
    const std::vector<std::size_t>& out_links(std::size_t op_index) const { return out_[op_index]; }

    std::size_t from_index(const LinkSpec& l) const { return operator_index(l.from); }
    std::size_t to_index(const LinkSpec& l) const { return operator_index(l.to); }

    /// Deterministic Kahn order; among ready operators the smallest id goes first.
    const std::vector<std::string>& topological_order() const { return topo_; }
    /// Position of each operator (by index) in topological_order().
    const std::vector<std::size_t>& topological_rank() const { return topo_rank_; }

    friend bool operator==(const WorkflowDag& a, const WorkflowDag& b) {
        return a.operators_ == b.operators_ && a.links_ == b.links_;
    }

private:
    std::vector<OperatorSpec> operators_;
    std::vector<LinkSpec> links_;
    std::map<std::string, std::size_t, std::less<>> op_index_;
    std::map<std::string, std::size_t, std::less<>> link_index_;
    std::vector<std::vector<std::size_t>> in_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::string> topo_;
    std::vector<std::size_t> topo_rank_;
};

WorkflowDag parse_workflow(std::string_view text, WorkflowOptions options = {});
/// Field-for-field inverse of parse_workflow (pretty-printed JSON).
std::string serialize_workflow(const WorkflowDag& dag);

std::vector<std::string> topological_order(const WorkflowDag& dag);

/// GraphViz text; blocking links carry color="red".
std::string export_dot(const WorkflowDag& dag);

} // namespace regionplan
