#include <doctest.h>

#include <random>

#include "generators.hpp"
#include "properties.hpp"
#include "regionplan/errors.hpp"
#include "regionplan/serialization.hpp"
#include "regionplan/simulator.hpp"

using namespace regionplan;

namespace {

SimReport run(const std::string& name, SimConfig cfg = {}) {
    PlanResult plan = build_region_graph(testgen::load_fixture(name));
    return simulate(plan.dag, plan.graph, plan.schedule, testgen::load_costs(name), cfg);
}

SimReport run(const WorkflowDag& dag, const CostModel& costs, SimConfig cfg = {}) {
    PlanResult plan = build_region_graph(dag);
    return simulate(plan.dag, plan.graph, plan.schedule, costs, cfg);
}

} // namespace

TEST_CASE("chain timings by hand") {
    SimConfig cfg;
    cfg.d_target = 2;
    SimReport r = run("chain", cfg);
    CHECK(r.first_output_times.at("Result") == std::vector<double>{2.5, 4.5});
    CHECK(r.total_time == doctest::Approx(4.5));
    REQUIRE(r.tau);
    CHECK(*r.tau == doctest::Approx(4.5));
    CHECK(r.link_tuples.at("l1") == 4u);
    CHECK(r.link_tuples.at("l2") == 2u);
}

TEST_CASE("two parallel branches share the cores") {
    SimConfig one;
    one.cores = 1;
    CHECK(run("two_op", one).total_time == doctest::Approx(20.0));
    SimConfig two;
    two.cores = 2;
    CHECK(run("two_op", two).total_time == doctest::Approx(10.0));
    CHECK(run("two_op").total_time == doctest::Approx(10.0));
}

TEST_CASE("region windows follow the schedule") {
    PlanResult plan = build_region_graph(testgen::load_fixture("self_join"));
    SimReport r = simulate(plan.dag, plan.graph, plan.schedule, testgen::load_costs("self_join"));
    REQUIRE(r.regions.size() == 2);
    CHECK(r.regions[0].id == "r1_1");
    CHECK(r.regions[0].start == 0.0);
    CHECK(r.regions[1].start == doctest::Approx(r.regions[0].end));
    CHECK(r.total_time == doctest::Approx(r.regions[1].end));
    CHECK(r.materialized_tuples.count("mw_l4"));
    CHECK(testprop::check_additivity(r, measure_region_times(r, plan.graph, plan.dag)) == "");
}

TEST_CASE("out-of-order schedule deadlocks") {
    PlanResult plan = build_region_graph(testgen::load_fixture("self_join"));
    Schedule reversed{{"r1_2", "r1_1"}};
    CHECK_THROWS_AS(simulate(plan.dag, plan.graph, reversed, testgen::load_costs("self_join")), DeadlockDetected);
}

TEST_CASE("configuration errors") {
    PlanResult plan = build_region_graph(testgen::load_fixture("chain"));
    CostModel costs = testgen::load_costs("chain");
    SimConfig zero_d;
    zero_d.d_target = 0;
    CHECK_THROWS_AS(simulate(plan.dag, plan.graph, plan.schedule, costs, zero_d), CostModelError);
    SimConfig zero_k;
    zero_k.cores = 0;
    CHECK_THROWS_AS(simulate(plan.dag, plan.graph, plan.schedule, costs, zero_k), CostModelError);
    costs.operators.erase("Filter");
    CHECK_THROWS_AS(simulate(plan.dag, plan.graph, plan.schedule, costs), MissingCost);
}

TEST_CASE("trace lists region and operator events") {
    SimConfig cfg;
    cfg.trace = true;
    SimReport r = run("chain", cfg);
    std::string csv = trace_csv(r);
    CHECK(csv.rfind("time,operator,event\n", 0) == 0);
    CHECK(csv.find("region_start") != std::string::npos);
    CHECK(csv.find("region_end") != std::string::npos);
    CHECK(csv.find("emit") != std::string::npos);
    CHECK(run("chain").trace.empty());
}

TEST_CASE("determinism") {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 40; ++i) {
        WorkflowDag dag = testgen::random_workflow(rng, {.max_ops = 12});
        CostModel costs = testgen::random_costs(rng, dag);
        SimConfig cfg;
        cfg.cores = 2;
        cfg.trace = true;
        PlanResult plan = build_region_graph(dag);
        SimReport a = simulate(plan.dag, plan.graph, plan.schedule, costs, cfg);
        SimReport b = simulate(plan.dag, plan.graph, plan.schedule, costs, cfg);
        auto regions = measure_region_times(a, plan.graph, plan.dag);
        CHECK(canonical_json(sim_report_to_json(a, regions)) == canonical_json(sim_report_to_json(b, regions)));
        CHECK(trace_csv(a) == trace_csv(b));
    }
}

TEST_CASE("additivity and conservation on random workflows") {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 100; ++i) {
        WorkflowDag dag = testgen::random_workflow(rng, {.max_ops = 12});
        CostModel costs = testgen::random_costs(rng, dag);
        SimConfig cfg;
        if (i % 2) cfg.cores = 1 + i % 3;
        cfg.d_target = 1;
        CAPTURE(serialize_workflow(dag));
        CHECK(testprop::check_simulation(dag, costs, cfg) == "");
    }
}

TEST_CASE("prefix formula bounds tau when d outputs span windows") {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 100; ++i) {
        WorkflowDag dag = testgen::random_workflow(rng, {.max_ops = 12});
        CostModel costs = testgen::random_costs(rng, dag);
        SimConfig cfg;
        cfg.d_target = 2 + i % 3;
        PlanResult plan = build_region_graph(dag);
        SimReport r = simulate(plan.dag, plan.graph, plan.schedule, costs, cfg);
        CHECK(testprop::check_conservation(plan.dag, costs, r) == "");
        double prefix = 0.0;
        for (const CostEstimate& e : measure_region_times(r, plan.graph, plan.dag)) {
            if (e.t_first) {
                REQUIRE(r.tau);
                CHECK(*r.tau <= prefix + *e.t_first + 1e-9);
                break;
            }
            prefix += e.t_full;
        }
    }
}

TEST_CASE("contention neutrality") {
    // With at least one core per operator the core limit never binds.
    std::mt19937_64 rng(47);
    for (int i = 0; i < 60; ++i) {
        WorkflowDag dag = testgen::random_workflow(rng, {.max_ops = 12});
        CostModel costs = testgen::random_costs(rng, dag);
        PlanResult plan = build_region_graph(dag);
        SimReport unbounded = simulate(plan.dag, plan.graph, plan.schedule, costs);
        SimConfig cfg;
        cfg.cores = static_cast<int>(plan.dag.operator_count());
        SimReport bounded = simulate(plan.dag, plan.graph, plan.schedule, costs, cfg);
        CHECK(bounded.total_time == unbounded.total_time);
        CHECK(bounded.first_output_times == unbounded.first_output_times);
        CHECK(bounded.tau == unbounded.tau);
    }
}

TEST_CASE("fewer cores never finish sooner") {
    std::mt19937_64 rng(53);
    for (int i = 0; i < 60; ++i) {
        WorkflowDag dag = testgen::random_workflow(rng, {.max_ops = 10});
        CostModel costs = testgen::random_costs(rng, dag);
        PlanResult plan = build_region_graph(dag);
        double previous = simulate(plan.dag, plan.graph, plan.schedule, costs).total_time;
        for (int k : {8, 4, 2, 1}) {
            SimConfig cfg;
            cfg.cores = k;
            double t = simulate(plan.dag, plan.graph, plan.schedule, costs, cfg).total_time;
            CHECK(t >= previous - 1e-9);
            previous = t;
        }
    }
}

TEST_CASE("monotonicity in per-tuple cost") {
    std::mt19937_64 rng(59);
    for (int i = 0; i < 80; ++i) {
        WorkflowDag dag = testgen::random_workflow(rng, {.max_ops = 10});
        CostModel costs = testgen::random_costs(rng, dag);
        PlanResult plan = build_region_graph(dag);
        SimReport base = simulate(plan.dag, plan.graph, plan.schedule, costs);
        const std::string& target = dag.operators()[i % dag.operator_count()].id;
        CostModel slower = costs;
        slower.operators.at(target).per_tuple_cost += 0.35;
        SimReport after = simulate(plan.dag, plan.graph, plan.schedule, slower);
        CAPTURE(target);
        CHECK(after.total_time >= base.total_time - 1e-9);
        if (base.tau) {
            REQUIRE(after.tau);
            CHECK(*after.tau >= *base.tau - 1e-9);
        }
    }
}

TEST_CASE("bottleneck bounds on chains") {
    std::mt19937_64 rng(61);
    for (int i = 0; i < 100; ++i) {
        auto [dag, costs] = testgen::random_chain(rng, 2 + i % 5);
        SimReport r = run(dag, costs);
        PlanResult plan = build_region_graph(dag);
        auto measured = measure_region_times(r, plan.graph, plan.dag);
        REQUIRE(measured.size() == 1);
        CostEstimate est = bottleneck_estimate(plan.dag, plan.graph.regions.front(), costs);
        CHECK(est.t_full <= measured.front().t_full + 1e-9);
        CHECK(est.t_first.has_value() == measured.front().t_first.has_value());
        if (est.t_first && measured.front().t_first) CHECK(*est.t_first >= *measured.front().t_first - 1e-9);
    }
}
