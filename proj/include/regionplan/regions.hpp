#pragma once

#include <set>
#include <string>
#include <vector>

#include "regionplan/workflow.hpp"

namespace regionplan {

/// Single-source pipelined sub-DAG. Members are in topological order.
struct Region {
    std::string id;
    std::string source;
    std::vector<std::string> members;

    bool contains(std::string_view op) const;
    friend bool operator==(const Region&, const Region&) = default;
};

struct RegionEdge {
    std::string from;
    std::string to;
    std::string via_link;

    friend auto operator<=>(const RegionEdge&, const RegionEdge&) = default;
};

struct RegionGraph {
    std::vector<Region> regions;
    std::vector<RegionEdge> edges;

    const Region& region(std::string_view id) const;
    const Region* find(std::string_view id) const;
    /// Ids of the regions containing `op`, in region order.
    std::vector<std::string> regions_of(std::string_view op) const;
};

struct Schedule {
    std::vector<std::string> order;
};

/// Orders "r2_1" < "r2_2" < "r3" < "r10": digit runs compare numerically.
bool natural_less(std::string_view a, std::string_view b);

/// Operators with no pipelined input link, sorted by id.
std::vector<std::string> source_operators(const WorkflowDag& dag);

/// Pipelined closure of `source`; throws NotASource.
Region extract_region(const WorkflowDag& dag, std::string_view source, std::string region_id = {});

/// Weakly connected components of the pipelined-only subgraph.
std::vector<std::set<std::string>> coarse_regions(const WorkflowDag& dag);

bool is_acyclic(const RegionGraph& graph);

/// Deterministic topological order with natural-order id tie-break; throws CyclicRegionGraph.
Schedule schedule(const RegionGraph& graph);

/// One region per source and one edge per (blocking link, region pair), with no
/// cycle resolution. `cyclic_regions` lists regions lying on a cycle.
struct RawDependencies {
    RegionGraph graph;
    std::vector<std::string> cyclic_regions;
};
RawDependencies raw_dependencies(const WorkflowDag& dag);

std::string export_region_dot(const RegionGraph& graph, const std::vector<std::string>& cyclic = {});

} // namespace regionplan
