#include <doctest.h>

#include <random>

#include "generators.hpp"
#include "regionplan/cost_model.hpp"
#include "regionplan/errors.hpp"
#include "regionplan/materializer.hpp"
#include "regionplan/regions.hpp"

using namespace regionplan;

TEST_CASE("floor rule") {
    CHECK(emitted_after(0, 0.5) == 0);
    CHECK(emitted_after(1, 0.5) == 0);
    CHECK(emitted_after(2, 0.5) == 1);
    CHECK(emitted_after(10, 0.3) == 3);
    CHECK(emitted_after(10, 0.1) == 1);
    CHECK(emitted_after(3, 2.0) == 6);
    CHECK(emitted_after(20, 0.05) == 1);
}

TEST_CASE("inverse of the floor rule") {
    CHECK(inputs_for_outputs(0, 0.5) == 0u);
    CHECK(inputs_for_outputs(1, 0.5) == 2u);
    CHECK(inputs_for_outputs(3, 0.3) == 10u);
    CHECK(inputs_for_outputs(5, 2.0) == 3u);
    CHECK_FALSE(inputs_for_outputs(1, 0.0));
    for (int step = 1; step <= 20; ++step) {
        double s = step * 0.1;
        for (std::uint64_t need = 1; need < 40; ++need) {
            auto k = inputs_for_outputs(need, s);
            REQUIRE(k);
            CHECK(emitted_after(*k, s) >= need);
            CHECK(emitted_after(*k - 1, s) < need);
        }
    }
}

TEST_CASE("cost model parsing") {
    CostModel m = parse_cost_model(R"({"operators": {"S": {"per_tuple_cost": 1, "scan_cardinality": 3},
                                                      "A": {"per_tuple_cost": 0.5, "selectivity": 0.2,
                                                            "blocking_input_cost": 0.1}},
                                       "machine": {"cores": 4}})");
    CHECK(m.cores == 4);
    CHECK(m.operators.at("S").scan_cardinality == 3u);
    CHECK(m.operators.at("A").selectivity == doctest::Approx(0.2));
    CHECK(m.operators.at("A").blocking_input_cost == doctest::Approx(0.1));

    CHECK_THROWS_AS(parse_cost_model("{"), ParseError);
    CHECK_THROWS_AS(parse_cost_model("{}"), SchemaError);
    CHECK_THROWS_AS(parse_cost_model(R"({"operators": {"A": {}}})"), SchemaError);
    CHECK_THROWS_AS(parse_cost_model(R"({"operators": {"A": {"per_tuple_cost": "x"}}})"), SchemaError);
    CHECK_THROWS_AS(parse_cost_model(R"({"operators": {"A": {"per_tuple_cost": -1}}})"), CostModelError);
    CHECK_THROWS_AS(parse_cost_model(R"({"operators": {"A": {"per_tuple_cost": 1, "selectivity": 0}}})"),
                    CostModelError);
    CHECK_THROWS_AS(parse_cost_model(R"({"operators": {}, "machine": {"cores": 0}})"), CostModelError);
}

TEST_CASE("resolution applies defaults and checks coverage") {
    WorkflowDag chain = testgen::load_fixture("chain");
    CostModel m = testgen::load_costs("chain");
    auto rc = resolve_costs(chain, m);
    const auto& filter = rc[chain.operator_index("Filter")];
    CHECK(filter.blocking_input_cost == doctest::Approx(filter.per_tuple_cost));
    CHECK(rc[chain.operator_index("Scan")].scan_cardinality == 4u);

    CostModel missing = m;
    missing.operators.erase("Filter");
    CHECK_THROWS_AS(resolve_costs(chain, missing), MissingCost);

    CostModel no_card = m;
    no_card.operators["Scan"].scan_cardinality.reset();
    CHECK_THROWS_AS(resolve_costs(chain, no_card), CostModelError);

    CostModel extra_card = m;
    extra_card.operators["Filter"].scan_cardinality = 5;
    CHECK_THROWS_AS(resolve_costs(chain, extra_card), CostModelError);
}

TEST_CASE("materialization operators take the default costs") {
    WorkflowDag dag = apply_choice(testgen::load_fixture("self_join"), MaterializationChoice{{"l4"}, 0});
    auto rc = resolve_costs(dag, testgen::load_costs("self_join"), MatCosts{0.25, 0.5});
    CHECK(rc[dag.operator_index("mw_l4")].per_tuple_cost == doctest::Approx(0.25));
    CHECK(rc[dag.operator_index("mr_l4")].per_tuple_cost == doctest::Approx(0.5));
    CHECK(rc[dag.operator_index("mr_l4")].blocking_input_cost == 0.0);
}

TEST_CASE("cardinalities propagate by the floor rule") {
    WorkflowDag chain = testgen::load_fixture("chain");
    Cardinalities c = propagate_cardinalities(chain, testgen::load_costs("chain"));
    CHECK(c.links.at("l1") == 4u);
    CHECK(c.links.at("l2") == 2u);
    CHECK(c.produced.at("Result") == 2u);
    CHECK(c.consumed.at("Filter") == 4u);

    // W1: 20 scanned, ML1 keeps 18, ML2 keeps 20, join emits floor(38 * 0.05) = 1.
    Cardinalities w1 = propagate_cardinalities(testgen::load_fixture("w1"), testgen::load_costs("w1"));
    CHECK(w1.links.at("l3") == 18u);
    CHECK(w1.links.at("l5") == 20u);
    CHECK(w1.links.at("l6") == 1u);
}

TEST_CASE("materialization preserves cardinalities") {
    WorkflowDag dag = testgen::load_fixture("self_join");
    CostModel m = testgen::load_costs("self_join");
    Cardinalities before = propagate_cardinalities(dag, m);
    Cardinalities after = propagate_cardinalities(apply_choice(dag, MaterializationChoice{{"l4"}, 0}), m);
    CHECK(after.links.at(materialization_ids("l4").reader_to_dest) == before.links.at("l4"));
    CHECK(after.produced.at("Viz") == before.produced.at("Viz"));
}

TEST_CASE("scaling multiplies every cost") {
    CostModel m = testgen::load_costs("w1");
    CostModel s = scale_costs(m, 7.0);
    for (const auto& [id, c] : m.operators) {
        CHECK(s.operators.at(id).per_tuple_cost == doctest::Approx(7.0 * c.per_tuple_cost));
        CHECK(s.operators.at(id).selectivity == c.selectivity);
        CHECK(s.operators.at(id).scan_cardinality == c.scan_cardinality);
    }
}

TEST_CASE("bottleneck estimate of the chain") {
    WorkflowDag chain = testgen::load_fixture("chain");
    Region r = extract_region(chain, "Scan", "r1");
    CostEstimate e = bottleneck_estimate(chain, r, testgen::load_costs("chain"));
    // busiest operator: Scan, 4 tuples at 1 s
    CHECK(e.t_full == doctest::Approx(4.0));
    // two scanned tuples plus the filter on both
    REQUIRE(e.t_first);
    CHECK(*e.t_first == doctest::Approx(3.0));
}
