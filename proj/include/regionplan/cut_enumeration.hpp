#pragma once

#include <cstddef>
#include <vector>

namespace regionplan {

struct CutEdge {
    std::size_t from;
    std::size_t to;
};

/// Directed edge-cut instance: make `target` unreachable from every node in
/// `sources` by removing edges. The position of an edge in `edges` is its rank;
/// callers list edges upstream-first.
struct CutProblem {
    std::size_t node_count = 0;
    std::vector<CutEdge> edges;
    std::vector<std::size_t> sources;
    std::size_t target = 0;
};

inline constexpr std::size_t kDefaultCutSpaceBound = 24;

/// True iff removing the edges whose positions are listed in `cut` leaves
/// `target` unreachable from all sources.
bool disconnects(const CutProblem& problem, const std::vector<std::size_t>& cut);

/// All inclusion-minimal cuts, each as ascending edge positions, sorted
/// lexicographically by those positions. Edges on no source-to-target path
/// never appear. Throws CutSpaceTooLarge if problem.edges.size() > bound.
std::vector<std::vector<std::size_t>> enumerate_minimal_cuts(const CutProblem& problem,
                                                             std::size_t bound = kDefaultCutSpaceBound);

} // namespace regionplan
