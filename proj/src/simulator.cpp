#include "regionplan/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <queue>
#include <sstream>

#include "regionplan/errors.hpp"

namespace regionplan {

namespace {

constexpr int kTick = -1;

struct Run {
    std::uint64_t count = 0;
    int link = kTick;
    double unit_cost = 0.0;
};

struct OpState {
    std::deque<Run> queue;
    bool busy = false;
    int item_link = kTick;
    bool item_positive = false;
    double service_end = 0.0;
    std::uint64_t consumed = 0;  // tuples counted by the selectivity rule
    std::uint64_t stored = 0;    // mat-reader only
    std::uint64_t pending = 0;   // produced but held back by the gate
    bool replayed = false;
};

struct Event {
    double time;
    std::size_t op;
    std::uint64_t seq;
    bool operator>(const Event& o) const {
        if (time != o.time) return time > o.time;
        if (op != o.op) return op > o.op;
        return seq > o.seq;
    }
};

class Simulation {
public:
    Simulation(const WorkflowDag& dag, const RegionGraph& graph, const CostModel& costs, const SimConfig& cfg)
        : dag_(dag), graph_(graph), cfg_(cfg),
          rc_(resolve_costs(dag, costs, MatCosts{cfg.writer_cost, cfg.reader_cost})),
          ops_(dag.operator_count()), processed_(dag.links().size(), 0), delivered_(dag.links().size(), 0),
          member_(dag.operator_count(), false), gate_(dag.operator_count(), false) {
        report_.d_target = cfg.d_target;
        report_.cores = cfg.cores ? cfg.cores : costs.cores;
    }

    SimReport run(const Schedule& order) {
        for (const std::string& rid : order.order) run_region(rid);
        std::vector<bool> done = done_flags();
        for (std::size_t v = 0; v < ops_.size(); ++v) {
            if (!done[v]) {
                throw DeadlockDetected("operator '" + dag_.operators()[v].id +
                                       "' never completed; the schedule leaves work unprocessed");
            }
        }
        for (std::size_t i = 0; i < dag_.links().size(); ++i) report_.link_tuples[dag_.links()[i].id] = delivered_[i];
        for (std::size_t v = 0; v < ops_.size(); ++v) {
            if (dag_.operators()[v].kind == OperatorKind::mat_writer) {
                report_.materialized_tuples[dag_.operators()[v].id] = ops_[v].consumed;
            }
        }
        report_.total_time = now_;
        const std::size_t d = static_cast<std::size_t>(cfg_.d_target);
        for (const auto& [op, times] : report_.first_output_times) {
            if (times.size() >= d && (!report_.tau || times[d - 1] < *report_.tau)) report_.tau = times[d - 1];
        }
        return std::move(report_);
    }

private:
    const WorkflowDag& dag_;
    const RegionGraph& graph_;
    const SimConfig& cfg_;
    std::vector<ResolvedCost> rc_;
    std::vector<OpState> ops_;
    std::vector<std::uint64_t> processed_;
    std::vector<std::uint64_t> delivered_;
    std::vector<bool> member_;
    std::vector<bool> gate_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::uint64_t seq_ = 0;
    double now_ = 0.0;
    RegionTiming* window_ = nullptr;
    SimReport report_;

    void trace(const std::string& subject, std::string event) {
        if (cfg_.trace) report_.trace.push_back({now_, subject, std::move(event)});
    }

    bool idle(std::size_t v) const { return !ops_[v].busy && ops_[v].queue.empty() && ops_[v].pending == 0; }

    bool needs_replay(std::size_t v) const {
        OperatorKind k = dag_.operators()[v].kind;
        return k == OperatorKind::scan || k == OperatorKind::mat_reader;
    }

    std::vector<bool> done_flags() const {
        std::vector<bool> done(ops_.size(), false);
        for (const std::string& id : dag_.topological_order()) {
            std::size_t v = dag_.operator_index(id);
            bool ok = idle(v) && (!needs_replay(v) || ops_[v].replayed);
            for (std::size_t li : dag_.in_links(v)) {
                if (!ok) break;
                ok = done[dag_.from_index(dag_.links()[li])] && processed_[li] == delivered_[li];
            }
            done[v] = ok;
        }
        return done;
    }

    void run_region(const std::string& rid) {
        const Region* region = graph_.find(rid);
        if (region == nullptr) throw DeadlockDetected("scheduled region '" + rid + "' does not exist");

        std::vector<bool> done = done_flags();
        std::fill(member_.begin(), member_.end(), false);
        std::fill(gate_.begin(), gate_.end(), false);
        for (const std::string& m : region->members) {
            std::size_t v = dag_.operator_index(m);
            member_[v] = true;
            gate_[v] = true;
            for (std::size_t li : dag_.in_links(v)) {
                const LinkSpec& l = dag_.links()[li];
                if (l.blocking() && !(done[dag_.from_index(l)] && processed_[li] == delivered_[li])) {
                    throw DeadlockDetected("region '" + rid + "' is not ready: blocking link '" + l.id +
                                           "' has not completed");
                }
            }
        }

        report_.regions.push_back(RegionTiming{rid, now_, now_, {}});
        window_ = &report_.regions.back();
        trace(rid, "region_start");

        std::size_t src = dag_.operator_index(region->source);
        if (needs_replay(src) && !ops_[src].replayed) {
            OpState& s = ops_[src];
            std::uint64_t ticks = dag_.operators()[src].kind == OperatorKind::scan ? rc_[src].scan_cardinality
                                                                                   : s.stored;
            if (ticks > 0) s.queue.push_back(Run{ticks, kTick, rc_[src].per_tuple_cost});
            s.replayed = true;
        }
        for (std::size_t v = 0; v < ops_.size(); ++v) {
            if (gate_[v] && ops_[v].pending > 0) {
                std::uint64_t held = ops_[v].pending;
                ops_[v].pending = 0;
                send(v, held);
            }
        }

        dispatch();
        while (!events_.empty()) {
            Event e = events_.top();
            events_.pop();
            now_ = e.time;
            finish(e.op);
            dispatch();
        }
        window_->end = now_;
        trace(rid, "region_end");

        for (const std::string& m : region->members) {
            std::size_t v = dag_.operator_index(m);
            if (ops_[v].pending > 0) {
                throw DeadlockDetected("operator '" + m + "' still holds output at the end of region '" + rid + "'");
            }
        }
        window_ = nullptr;
    }

    void dispatch() {
        for (std::size_t v = 0; v < ops_.size(); ++v) {
            if (!ops_[v].busy && !ops_[v].queue.empty()) start(v);
        }
    }

    double contention() const {
        if (!report_.cores) return 1.0;
        std::size_t active = 0;
        for (const OpState& s : ops_) {
            bool serving = s.busy && s.item_positive && s.service_end > now_;
            bool backlogged = !s.queue.empty() && s.queue.front().unit_cost > 0;
            if (serving || backlogged) ++active;
        }
        return std::max(1.0, static_cast<double>(active) / *report_.cores);
    }

    void start(std::size_t v) {
        OpState& s = ops_[v];
        double factor = contention();
        Run& front = s.queue.front();
        double cost = front.unit_cost;
        s.item_link = front.link;
        if (--front.count == 0) s.queue.pop_front();
        s.busy = true;
        s.item_positive = cost > 0;
        s.service_end = now_ + cost * factor;
        events_.push(Event{s.service_end, v, seq_++});
        trace(dag_.operators()[v].id, "start");
    }

    void finish(std::size_t v) {
        OpState& s = ops_[v];
        s.busy = false;
        const OperatorSpec& op = dag_.operators()[v];
        trace(op.id, "finish");
        std::uint64_t out = 0;
        if (s.item_link == kTick) {
            out = 1;
        } else {
            std::size_t li = static_cast<std::size_t>(s.item_link);
            ++processed_[li];
            if (op.kind == OperatorKind::mat_reader && dag_.links()[li].blocking()) {
                ++s.stored;
            } else {
                ++s.consumed;
                out = emitted_after(s.consumed, rc_[v].selectivity) - emitted_after(s.consumed - 1, rc_[v].selectivity);
            }
        }
        if (out == 0) return;
        if (gate_[v]) {
            send(v, out);
        } else {
            s.pending += out;
        }
    }

    void send(std::size_t v, std::uint64_t count) {
        const OperatorSpec& op = dag_.operators()[v];
        if (cfg_.trace) trace(op.id, "emit " + std::to_string(count));
        if (op.is_result) record_outputs(op.id, count);
        for (std::size_t li : dag_.out_links(v)) {
            const LinkSpec& l = dag_.links()[li];
            std::size_t w = dag_.to_index(l);
            delivered_[li] += count;
            double cost = l.blocking() ? rc_[w].blocking_input_cost : rc_[w].per_tuple_cost;
            std::deque<Run>& q = ops_[w].queue;
            if (!q.empty() && q.back().link == static_cast<int>(li)) {
                q.back().count += count;
            } else {
                q.push_back(Run{count, static_cast<int>(li), cost});
            }
        }
    }

    void record_outputs(const std::string& op, std::uint64_t count) {
        const std::size_t d = static_cast<std::size_t>(cfg_.d_target);
        std::vector<double>& all = report_.first_output_times[op];
        std::vector<double>& local = window_->result_outputs[op];
        for (std::uint64_t i = 0; i < count; ++i) {
            if (all.size() < d) all.push_back(now_);
            if (local.size() < d) local.push_back(now_);
        }
    }
};

} // namespace

SimReport simulate(const WorkflowDag& dag, const RegionGraph& graph, const Schedule& order,
                   const CostModel& costs, const SimConfig& cfg) {
    if (cfg.d_target == 0) throw CostModelError("first-k must be at least 1");
    if (cfg.cores && *cfg.cores < 1) throw CostModelError("cores must be at least 1");
    Simulation sim(dag, graph, costs, cfg);
    return sim.run(order);
}

std::vector<CostEstimate> measure_region_times(const SimReport& report, const RegionGraph& graph,
                                               const WorkflowDag& dag) {
    std::vector<CostEstimate> out;
    const std::size_t d = static_cast<std::size_t>(report.d_target);
    for (const RegionTiming& rt : report.regions) {
        CostEstimate est{rt.id, rt.end - rt.start, std::nullopt};
        const Region& region = graph.region(rt.id);
        for (const std::string& m : region.members) {
            if (!dag.op(m).is_result) continue;
            auto it = rt.result_outputs.find(m);
            if (it == rt.result_outputs.end() || it->second.size() < d) continue;
            double t = it->second[d - 1] - rt.start;
            if (!est.t_first || t < *est.t_first) est.t_first = t;
        }
        out.push_back(std::move(est));
    }
    return out;
}

std::string trace_csv(const SimReport& report) {
    std::ostringstream os;
    os << "time,operator,event\n";
    char buf[64];
    for (const TraceEvent& e : report.trace) {
        std::snprintf(buf, sizeof buf, "%.6f", e.time);
        os << buf << ',' << e.subject << ',' << e.event << '\n';
    }
    return os.str();
}

} // namespace regionplan
