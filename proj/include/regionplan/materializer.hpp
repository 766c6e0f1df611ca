#pragma once

#include <string>
#include <vector>

#include "regionplan/cut_enumeration.hpp"
#include "regionplan/regions.hpp"
#include "regionplan/workflow.hpp"

namespace regionplan {

/// Everything needed to cut the pipelined supply of a conflicting operator
/// without disturbing the blocking supply of the next region on the cycle.
struct ConflictContext {
    std::string conflict_op;
    std::string blocking_link;
    std::string r_u;
    std::string r_o;
    std::string r_m;
    std::string source_o;
    std::vector<std::string> g_o;       ///< pipelined supply S_o -> conflict_op
    std::vector<std::string> g_m;       ///< pipelined supply S_o -> blocking links of the edge r_o -> r_m
    std::vector<std::string> g_f;       ///< g_o minus g_m: the legal cut space
    std::vector<std::string> boundary;  ///< operators of g_m feeding a g_f link
};

struct MaterializationChoice {
    std::vector<std::string> cut;  ///< link ids, upstream first
    std::size_t index = 0;

    friend bool operator==(const MaterializationChoice&, const MaterializationChoice&) = default;
};

/// Precondition: adding r_u -> r_o to `graph` closes a cycle (r_u may equal r_o).
ConflictContext build_conflict_context(const WorkflowDag& dag, const RegionGraph& graph,
                                       const std::string& conflict_op, const std::string& blocking_link,
                                       const std::string& r_u, const std::string& r_o);

/// The cut instance behind a context: g_f links ordered upstream-first by
/// (topological rank of from, of to, link id).
struct ContextCutProblem {
    CutProblem problem;
    std::vector<std::string> link_ids;  ///< link id of each problem edge
};
ContextCutProblem make_cut_problem(const WorkflowDag& dag, const ConflictContext& ctx);

/// All minimal cut-edge sets of the context, ordered upstream-first
/// (lexicographic on the ranks of their links).
std::vector<MaterializationChoice> enumerate_choices(const WorkflowDag& dag, const ConflictContext& ctx,
                                                     std::size_t bound = kDefaultCutSpaceBound);

/// Ids of the operators and links that materializing `link_id` introduces.
struct MaterializationIds {
    std::string writer;
    std::string reader;
    std::string to_writer;
    std::string writer_to_reader;
    std::string reader_to_dest;
};
MaterializationIds materialization_ids(const std::string& link_id);

/// Replaces each cut link from->to with from->MW (pipelined), MW->MR
/// (blocking), MR->to (pipelined, same port).
WorkflowDag apply_choice(const WorkflowDag& dag, const MaterializationChoice& choice);

} // namespace regionplan
