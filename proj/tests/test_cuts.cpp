#include <doctest.h>

#include <random>

#include "generators.hpp"
#include "properties.hpp"
#include "regionplan/cut_enumeration.hpp"
#include "regionplan/errors.hpp"

using namespace regionplan;

namespace {

// Subset oracle directly on a CutProblem.
std::set<std::vector<std::size_t>> subset_cuts(const CutProblem& p) {
    std::set<std::vector<std::size_t>> out;
    const std::size_t m = p.edges.size();
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        std::vector<std::size_t> cut;
        for (std::size_t i = 0; i < m; ++i) {
            if (mask & (1u << i)) cut.push_back(i);
        }
        if (!disconnects(p, cut)) continue;
        bool minimal = true;
        for (std::size_t i = 0; i < cut.size() && minimal; ++i) {
            std::vector<std::size_t> smaller = cut;
            smaller.erase(smaller.begin() + static_cast<std::ptrdiff_t>(i));
            if (disconnects(p, smaller)) minimal = false;
        }
        if (minimal) out.insert(cut);
    }
    return out;
}

} // namespace

TEST_CASE("diamond has four minimal cuts") {
    // 0 -> 1 -> 3, 0 -> 2 -> 3
    CutProblem p{4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}, {0}, 3};
    auto cuts = enumerate_minimal_cuts(p);
    CHECK(cuts == std::vector<std::vector<std::size_t>>{{0, 1}, {0, 3}, {1, 2}, {2, 3}});
}

TEST_CASE("edges off every path never appear") {
    CutProblem p{4, {{0, 1}, {1, 3}, {0, 2}}, {0}, 3};
    auto cuts = enumerate_minimal_cuts(p);
    CHECK(cuts == std::vector<std::vector<std::size_t>>{{0}, {1}});
}

TEST_CASE("several sources") {
    CutProblem p{3, {{0, 2}, {1, 2}}, {0, 1}, 2};
    CHECK(enumerate_minimal_cuts(p) == std::vector<std::vector<std::size_t>>{{0, 1}});
}

TEST_CASE("bound is enforced") {
    CutProblem p;
    p.node_count = 6;
    for (std::size_t i = 0; i < 5; ++i) p.edges.push_back({i, i + 1});
    p.sources = {0};
    p.target = 5;
    CHECK_THROWS_AS(enumerate_minimal_cuts(p, 4), CutSpaceTooLarge);
    CHECK(enumerate_minimal_cuts(p, 5).size() == 5);
    CHECK_THROWS_AS(enumerate_minimal_cuts(p, 40), CutSpaceTooLarge);
}

TEST_CASE("random cut problems agree with the subset oracle") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 300; ++t) {
        CutProblem p;
        p.node_count = std::uniform_int_distribution<std::size_t>(2, 7)(rng);
        std::size_t m = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
        std::uniform_int_distribution<std::size_t> node(0, p.node_count - 1);
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t a = node(rng), b = node(rng);
            if (a == b) continue;
            p.edges.push_back({std::min(a, b), std::max(a, b)});
        }
        p.sources = {0};
        p.target = p.node_count - 1;
        auto got = enumerate_minimal_cuts(p);
        std::set<std::vector<std::size_t>> as_set(got.begin(), got.end());
        CHECK(as_set == subset_cuts(p));
        CHECK(std::is_sorted(got.begin(), got.end()));
    }
}

TEST_CASE("planner contexts agree with the subset oracle") {
    std::mt19937_64 rng(23);
    int contexts = 0;
    for (int i = 0; i < 300 && contexts < 100; ++i) {
        WorkflowDag dag = testgen::random_workflow(rng, {.max_ops = 12});
        for (const auto& [d, ctx] : testprop::collect_contexts(dag)) {
            ++contexts;
            CHECK(testprop::as_set(enumerate_choices(d, ctx)) == testprop::brute_force_cuts(d, ctx));
        }
    }
    CHECK(contexts > 20);
}
