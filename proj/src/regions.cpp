#include "regionplan/regions.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

#include "regionplan/errors.hpp"

namespace regionplan {

bool Region::contains(std::string_view op) const {
    return std::find(members.begin(), members.end(), op) != members.end();
}

const Region* RegionGraph::find(std::string_view id) const {
    for (const Region& r : regions) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

const Region& RegionGraph::region(std::string_view id) const {
    const Region* r = find(id);
    if (!r) throw CyclicRegionGraph("unknown region '" + std::string(id) + "'");
    return *r;
}

std::vector<std::string> RegionGraph::regions_of(std::string_view op) const {
    std::vector<std::string> out;
    for (const Region& r : regions) {
        if (r.contains(op)) out.push_back(r.id);
    }
    return out;
}

bool natural_less(std::string_view a, std::string_view b) {
    std::size_t i = 0, j = 0;
    auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
    while (i < a.size() && j < b.size()) {
        if (is_digit(a[i]) && is_digit(b[j])) {
            std::size_t i2 = i, j2 = j;
            while (i2 < a.size() && is_digit(a[i2])) ++i2;
            while (j2 < b.size() && is_digit(b[j2])) ++j2;
            std::string_view na = a.substr(i, i2 - i), nb = b.substr(j, j2 - j);
            while (na.size() > 1 && na.front() == '0') na.remove_prefix(1);
            while (nb.size() > 1 && nb.front() == '0') nb.remove_prefix(1);
            if (na.size() != nb.size()) return na.size() < nb.size();
            if (na != nb) return na < nb;
            i = i2;
            j = j2;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    if ((a.size() - i) != (b.size() - j)) return (a.size() - i) < (b.size() - j);
    return a < b;
}

std::vector<std::string> source_operators(const WorkflowDag& dag) {
    std::vector<std::string> out;
    for (std::size_t v = 0; v < dag.operator_count(); ++v) {
        bool has_pipelined = false;
        for (std::size_t li : dag.in_links(v)) {
            if (dag.links()[li].pipelined()) has_pipelined = true;
        }
        if (!has_pipelined) out.push_back(dag.operators()[v].id);
    }
    return out;
}

Region extract_region(const WorkflowDag& dag, std::string_view source, std::string region_id) {
    std::size_t s = dag.operator_index(source);
    for (std::size_t li : dag.in_links(s)) {
        if (dag.links()[li].pipelined()) {
            throw NotASource("operator '" + std::string(source) + "' has pipelined input link '" +
                             dag.links()[li].id + "'");
        }
    }
    std::vector<bool> seen(dag.operator_count(), false);
    std::vector<std::size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        for (std::size_t li : dag.out_links(v)) {
            const LinkSpec& l = dag.links()[li];
            if (!l.pipelined()) continue;
            std::size_t w = dag.to_index(l);
            if (!seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    Region r;
    r.id = std::move(region_id);
    r.source = std::string(source);
    for (const std::string& id : dag.topological_order()) {
        if (seen[dag.operator_index(id)]) r.members.push_back(id);
    }
    return r;
}

std::vector<std::set<std::string>> coarse_regions(const WorkflowDag& dag) {
    const std::size_t n = dag.operator_count();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const LinkSpec& l : dag.links()) {
        if (!l.pipelined()) continue;
        std::size_t a = find(dag.from_index(l)), b = find(dag.to_index(l));
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::map<std::size_t, std::set<std::string>> groups;
    for (std::size_t v = 0; v < n; ++v) groups[find(v)].insert(dag.operators()[v].id);
    std::vector<std::set<std::string>> out;
    for (auto& [root, members] : groups) out.push_back(std::move(members));
    return out;
}

namespace {

struct IndexedGraph {
    std::vector<std::string> ids;
    std::vector<std::vector<std::size_t>> next;
};

IndexedGraph index_graph(const RegionGraph& graph) {
    IndexedGraph g;
    std::map<std::string, std::size_t, std::less<>> idx;
    for (const Region& r : graph.regions) {
        idx.emplace(r.id, g.ids.size());
        g.ids.push_back(r.id);
    }
    g.next.assign(g.ids.size(), {});
    for (const RegionEdge& e : graph.edges) {
        auto a = idx.find(e.from), b = idx.find(e.to);
        if (a == idx.end() || b == idx.end()) {
            throw CyclicRegionGraph("edge references unknown region (" + e.from + " -> " + e.to + ")");
        }
        g.next[a->second].push_back(b->second);
    }
    return g;
}

bool reaches(const IndexedGraph& g, std::size_t from, std::size_t to, bool allow_empty_path) {
    if (allow_empty_path && from == to) return true;
    std::vector<bool> seen(g.ids.size(), false);
    std::vector<std::size_t> stack(g.next[from].begin(), g.next[from].end());
    while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        if (v == to) return true;
        if (seen[v]) continue;
        seen[v] = true;
        stack.insert(stack.end(), g.next[v].begin(), g.next[v].end());
    }
    return false;
}

} // namespace

bool is_acyclic(const RegionGraph& graph) {
    IndexedGraph g = index_graph(graph);
    std::vector<std::size_t> indegree(g.ids.size(), 0);
    for (const auto& out : g.next) {
        for (std::size_t w : out) ++indegree[w];
    }
    std::vector<std::size_t> stack;
    for (std::size_t v = 0; v < indegree.size(); ++v) {
        if (indegree[v] == 0) stack.push_back(v);
    }
    std::size_t visited = 0;
    while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        ++visited;
        for (std::size_t w : g.next[v]) {
            if (--indegree[w] == 0) stack.push_back(w);
        }
    }
    return visited == g.ids.size();
}

Schedule schedule(const RegionGraph& graph) {
    IndexedGraph g = index_graph(graph);
    std::vector<std::size_t> indegree(g.ids.size(), 0);
    for (const auto& out : g.next) {
        for (std::size_t w : out) ++indegree[w];
    }
    auto later = [&](std::size_t a, std::size_t b) { return natural_less(g.ids[b], g.ids[a]); };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
    for (std::size_t v = 0; v < indegree.size(); ++v) {
        if (indegree[v] == 0) ready.push(v);
    }
    Schedule s;
    while (!ready.empty()) {
        std::size_t v = ready.top();
        ready.pop();
        s.order.push_back(g.ids[v]);
        for (std::size_t w : g.next[v]) {
            if (--indegree[w] == 0) ready.push(w);
        }
    }
    if (s.order.size() != g.ids.size()) throw CyclicRegionGraph("region graph has a cycle");
    return s;
}

RawDependencies raw_dependencies(const WorkflowDag& dag) {
    RawDependencies raw;
    std::vector<std::string> sources = source_operators(dag);
    std::sort(sources.begin(), sources.end(), [&](const std::string& a, const std::string& b) {
        return dag.topological_rank()[dag.operator_index(a)] < dag.topological_rank()[dag.operator_index(b)];
    });
    int counter = 1;
    for (const std::string& s : sources) {
        raw.graph.regions.push_back(extract_region(dag, s, "r" + std::to_string(counter++)));
    }
    for (const LinkSpec& l : dag.links()) {
        if (!l.blocking()) continue;
        for (const std::string& ru : raw.graph.regions_of(l.from)) {
            for (const std::string& ro : raw.graph.regions_of(l.to)) {
                raw.graph.edges.push_back({ru, ro, l.id});
            }
        }
    }
    std::sort(raw.graph.edges.begin(), raw.graph.edges.end());
    IndexedGraph g = index_graph(raw.graph);
    for (std::size_t v = 0; v < g.ids.size(); ++v) {
        if (reaches(g, v, v, false)) raw.cyclic_regions.push_back(g.ids[v]);
    }
    return raw;
}

std::string export_region_dot(const RegionGraph& graph, const std::vector<std::string>& cyclic) {
    std::ostringstream os;
    os << "digraph regions {\n";
    for (const Region& r : graph.regions) {
        os << "  \"" << r.id << "\" [label=\"" << r.id << "\\n";
        for (std::size_t i = 0; i < r.members.size(); ++i) {
            os << (i ? ", " : "") << r.members[i];
        }
        os << "\"";
        if (std::find(cyclic.begin(), cyclic.end(), r.id) != cyclic.end()) os << ", color=\"orange\"";
        os << "];\n";
    }
    for (const RegionEdge& e : graph.edges) {
        os << "  \"" << e.from << "\" -> \"" << e.to << "\" [label=\"" << e.via_link << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace regionplan
