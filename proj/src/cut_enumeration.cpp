#include "regionplan/cut_enumeration.hpp"

#include <algorithm>
#include <cstdint>
#include <string>

#include "regionplan/errors.hpp"

namespace regionplan {

namespace {

std::vector<bool> forward_reach(const CutProblem& p, const std::vector<bool>& removed) {
    std::vector<bool> seen(p.node_count, false);
    for (std::size_t s : p.sources) seen[s] = true;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t e = 0; e < p.edges.size(); ++e) {
            if (removed[e]) continue;
            if (seen[p.edges[e].from] && !seen[p.edges[e].to]) {
                seen[p.edges[e].to] = true;
                changed = true;
            }
        }
    }
    return seen;
}

std::vector<bool> backward_reach(const CutProblem& p) {
    std::vector<bool> seen(p.node_count, false);
    seen[p.target] = true;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t e = p.edges.size(); e-- > 0;) {
            if (seen[p.edges[e].to] && !seen[p.edges[e].from]) {
                seen[p.edges[e].from] = true;
                changed = true;
            }
        }
    }
    return seen;
}

// Compact form over the relevant edges, with node sets as 64-bit masks.
struct MaskProblem {
    std::vector<std::uint64_t> from_bit;
    std::vector<std::uint64_t> to_bit;
    std::uint64_t sources = 0;
    std::uint64_t target = 0;

    bool disconnects(std::uint32_t cut) const {
        std::uint64_t seen = sources;
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t e = 0; e < from_bit.size(); ++e) {
                if (cut & (std::uint32_t{1} << e)) continue;
                if ((seen & from_bit[e]) && !(seen & to_bit[e])) {
                    seen |= to_bit[e];
                    changed = true;
                }
            }
        }
        return !(seen & target);
    }
};

} // namespace

bool disconnects(const CutProblem& problem, const std::vector<std::size_t>& cut) {
    std::vector<bool> removed(problem.edges.size(), false);
    for (std::size_t e : cut) removed.at(e) = true;
    return !forward_reach(problem, removed)[problem.target];
}

std::vector<std::vector<std::size_t>> enumerate_minimal_cuts(const CutProblem& problem, std::size_t bound) {
    if (problem.edges.size() > bound) {
        throw CutSpaceTooLarge("cut space has " + std::to_string(problem.edges.size()) +
                               " links, above the enumeration bound of " + std::to_string(bound));
    }
    if (bound > 31) throw CutSpaceTooLarge("enumeration bound above 31 links is not supported");

    std::vector<bool> none(problem.edges.size(), false);
    std::vector<bool> fwd = forward_reach(problem, none);
    if (!fwd[problem.target]) return {{}};
    std::vector<bool> bwd = backward_reach(problem);

    std::vector<std::size_t> relevant;
    for (std::size_t e = 0; e < problem.edges.size(); ++e) {
        if (fwd[problem.edges[e].from] && bwd[problem.edges[e].to]) relevant.push_back(e);
    }

    // Renumber the nodes touched by relevant edges so they fit one mask.
    std::vector<int> compact(problem.node_count, -1);
    int next = 0;
    auto bit = [&](std::size_t node) {
        if (compact[node] < 0) compact[node] = next++;
        return std::uint64_t{1} << compact[node];
    };
    MaskProblem mp;
    for (std::size_t e : relevant) {
        mp.from_bit.push_back(bit(problem.edges[e].from));
        mp.to_bit.push_back(bit(problem.edges[e].to));
    }
    for (std::size_t s : problem.sources) {
        if (compact[s] >= 0) mp.sources |= std::uint64_t{1} << compact[s];
    }
    mp.target = bit(problem.target);

    const std::size_t m = relevant.size();
    std::vector<std::uint32_t> found;
    for (std::size_t k = 1; k <= m; ++k) {
        // Gosper's hack walks every k-subset of m bits.
        std::uint32_t subset = (std::uint32_t{1} << k) - 1;
        const std::uint32_t limit = std::uint32_t{1} << m;
        while (subset < limit) {
            bool superset = std::any_of(found.begin(), found.end(),
                                        [&](std::uint32_t f) { return (subset & f) == f; });
            if (!superset && mp.disconnects(subset)) found.push_back(subset);
            std::uint32_t c = subset & (~subset + 1);
            std::uint32_t r = subset + c;
            subset = (((r ^ subset) >> 2) / c) | r;
        }
    }

    std::vector<std::vector<std::size_t>> cuts;
    for (std::uint32_t f : found) {
        std::vector<std::size_t> cut;
        for (std::size_t i = 0; i < m; ++i) {
            if (f & (std::uint32_t{1} << i)) cut.push_back(relevant[i]);
        }
        cuts.push_back(std::move(cut));
    }
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

} // namespace regionplan
