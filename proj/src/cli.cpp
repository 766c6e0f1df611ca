#include "regionplan/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "regionplan/errors.hpp"
#include "regionplan/estimator.hpp"
#include "regionplan/serialization.hpp"

namespace regionplan {

namespace {

using json = nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw ParseError("cannot write '" + path + "'");
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
    } else {
        write_file(out_path, text);
    }
}

struct Options {
    std::string workflow;
    std::string costs;
    std::string policy;
    std::string format = "json";
    std::string out;
    std::string plan;
    std::string trace;
    bool no_materialize = false;
    std::uint64_t first_k = 1;
    std::optional<int> cores;
    std::size_t bound = kDefaultCutSpaceBound;
};

std::optional<CostModel> load_costs(const Options& o) {
    if (o.costs.empty()) return std::nullopt;
    return parse_cost_model(read_file(o.costs));
}

SimConfig sim_config(const Options& o) {
    SimConfig cfg;
    cfg.cores = o.cores;
    cfg.d_target = o.first_k;
    return cfg;
}

ChoicePolicy resolve_policy(const Options& o, bool have_costs) {
    if (o.policy.empty()) return have_costs ? ChoicePolicy::simulate : ChoicePolicy::first;
    auto p = parse_policy(o.policy);
    if (!p) throw ValidationError("unknown policy '" + o.policy + "'");
    return *p;
}

PlanResult make_plan(const WorkflowDag& dag, const Options& o, const std::optional<CostModel>& costs,
                     ChoicePolicy policy) {
    PlannerOptions options = planner_options(policy, costs, sim_config(o));
    options.cut_bound = o.bound;
    return build_region_graph(dag, options);
}

int cmd_validate(const Options& o, std::ostream& out) {
    WorkflowDag dag = parse_workflow(read_file(o.workflow));
    out << "valid: " << dag.operator_count() << " operators, " << dag.links().size() << " links\n";
    return 0;
}

int cmd_regions(const Options& o, std::ostream& out, std::ostream& err) {
    WorkflowDag dag = parse_workflow(read_file(o.workflow));
    if (o.no_materialize) {
        RawDependencies raw = raw_dependencies(dag);
        if (!raw.cyclic_regions.empty()) err << "cycle detected at region " << raw.cyclic_regions.front() << "\n";
        if (o.format == "dot") {
            emit(export_region_dot(raw.graph, raw.cyclic_regions), o.out, out);
        } else {
            json doc = region_graph_to_json(raw.graph);
            doc["cyclic_regions"] = raw.cyclic_regions;
            emit(canonical_json(doc), o.out, out);
        }
        return 0;
    }
    std::optional<CostModel> costs = load_costs(o);
    PlanResult plan = make_plan(dag, o, costs, resolve_policy(o, costs.has_value()));
    if (o.format == "dot") {
        emit(export_region_dot(plan.graph), o.out, out);
    } else {
        json doc = region_graph_to_json(plan.graph);
        doc["schedule"] = plan.schedule.order;
        emit(canonical_json(doc), o.out, out);
    }
    return 0;
}

int cmd_choices(const Options& o, std::ostream& out) {
    WorkflowDag dag = parse_workflow(read_file(o.workflow));
    std::optional<CostModel> costs = load_costs(o);
    ChoicePolicy policy = resolve_policy(o, costs.has_value());
    PlannerOptions options = planner_options(policy, costs, sim_config(o));
    options.cut_bound = o.bound;
    if (costs) {
        // Record tau_c of every feasible choice whatever policy resolves the conflict.
        SimConfig cfg = sim_config(o);
        Chooser decide = options.chooser;
        options.chooser = [&, decide](const PlanState& s, const ConflictContext& ctx,
                                      const std::vector<MaterializationChoice>& feasible) {
            ChoiceDecision timed = evaluate_and_choose(s, ctx, feasible, *costs, cfg, ChoicePolicy::simulate);
            if (decide) timed.chosen = decide(s, ctx, feasible).chosen;
            else timed.chosen = feasible.front().index;
            return timed;
        };
    }
    PlanResult plan = build_region_graph(dag, options);
    emit(canonical_json(choices_to_json(plan.log)), o.out, out);
    return 0;
}

int cmd_plan(const Options& o, std::ostream& out) {
    WorkflowDag dag = parse_workflow(read_file(o.workflow));
    std::optional<CostModel> costs = load_costs(o);
    ChoicePolicy policy = resolve_policy(o, costs.has_value());
    PlanResult plan = make_plan(dag, o, costs, policy);
    PlanBundleInfo info{std::string(to_string(policy)), o.first_k, o.cores};
    if (!info.cores && costs) info.cores = costs->cores;
    emit(canonical_json(plan_bundle_to_json(plan, info)), o.out, out);
    return 0;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    std::optional<CostModel> costs = load_costs(o);
    if (!costs) throw CostModelError("simulate needs --costs");
    PlanResult plan;
    if (!o.plan.empty()) {
        plan = plan_bundle_from_json(read_file(o.plan));
    } else {
        WorkflowDag dag = parse_workflow(read_file(o.workflow));
        plan = make_plan(dag, o, costs, resolve_policy(o, true));
    }
    SimConfig cfg = sim_config(o);
    cfg.trace = !o.trace.empty();
    SimReport report = simulate(plan.dag, plan.graph, plan.schedule, *costs, cfg);
    std::vector<CostEstimate> regions = measure_region_times(report, plan.graph, plan.dag);
    if (cfg.trace) write_file(o.trace, trace_csv(report));
    emit(canonical_json(sim_report_to_json(report, regions)), o.out, out);
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Plans region schedules for workflows with blocking and pipelined links", "regionplan"};
    app.require_subcommand(1);
    Options o;

    auto add_workflow = [&](CLI::App* cmd, bool required) {
        auto* opt = cmd->add_option("workflow", o.workflow, "workflow JSON file");
        if (required) opt->required();
    };
    auto add_cut_bound = [&](CLI::App* cmd) {
        cmd->add_option("--cut-bound", o.bound, "largest cut space to enumerate")->check(CLI::Range(1, 31));
    };
    auto add_sim = [&](CLI::App* cmd) {
        cmd->add_option("--first-k", o.first_k, "d, result tuples for first-response time")->check(CLI::PositiveNumber);
        cmd->add_option("--cores", o.cores, "cores K (default: cost model, else unbounded)")->check(CLI::PositiveNumber);
    };
    const std::vector<std::string> policies{"simulate", "bottleneck", "first", "materialized-size"};

    CLI::App* validate = app.add_subcommand("validate", "check a workflow file");
    add_workflow(validate, true);

    CLI::App* regions = app.add_subcommand("regions", "print the final region graph");
    add_workflow(regions, true);
    regions->add_option("--format", o.format, "json or dot")->check(CLI::IsMember({"json", "dot"}));
    regions->add_flag("--no-materialize", o.no_materialize, "raw dependencies, cycles flagged");
    regions->add_option("--costs", o.costs, "cost model JSON");
    regions->add_option("--policy", o.policy, "choice policy")->check(CLI::IsMember(policies));
    regions->add_option("--out", o.out, "output file");
    add_sim(regions);
    add_cut_bound(regions);

    CLI::App* choices = app.add_subcommand("choices", "list the materialization choices of every conflict");
    add_workflow(choices, true);
    choices->add_option("--costs", o.costs, "cost model JSON; adds tau_c");
    choices->add_option("--policy", o.policy, "policy resolving each conflict")->check(CLI::IsMember(policies));
    choices->add_option("--out", o.out, "output file");
    add_sim(choices);
    add_cut_bound(choices);

    CLI::App* plan = app.add_subcommand("plan", "build a plan bundle");
    add_workflow(plan, true);
    plan->add_option("--costs", o.costs, "cost model JSON");
    plan->add_option("--policy", o.policy, "simulate, bottleneck, first or materialized-size")
        ->check(CLI::IsMember(policies));
    plan->add_option("--out", o.out, "output file");
    add_sim(plan);
    add_cut_bound(plan);

    CLI::App* sim = app.add_subcommand("simulate", "simulate a plan");
    add_workflow(sim, false);
    sim->add_option("--costs", o.costs, "cost model JSON")->required();
    sim->add_option("--plan", o.plan, "plan bundle from 'plan'");
    sim->add_option("--policy", o.policy, "policy when no plan is given")->check(CLI::IsMember(policies));
    sim->add_option("--trace", o.trace, "write a time,operator,event CSV here");
    sim->add_option("--out", o.out, "output file");
    add_sim(sim);
    add_cut_bound(sim);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (validate->parsed()) return cmd_validate(o, out);
        if (regions->parsed()) return cmd_regions(o, out, err);
        if (choices->parsed()) return cmd_choices(o, out);
        if (plan->parsed()) return cmd_plan(o, out);
        if (sim->parsed()) {
            if (o.plan.empty() && o.workflow.empty()) throw ValidationError("simulate needs a workflow or --plan");
            return cmd_simulate(o, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace regionplan
