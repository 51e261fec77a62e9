#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "wesim/error.hpp"
#include "wesim/infra.hpp"
#include "wesim/profiles.hpp"
#include "wesim/sched.hpp"
#include "wesim/wes_generator.hpp"
#include "wesim/workflow.hpp"

namespace wesim {

struct Oversubscription {
    enum class Kind { forbid, penalize };

    Kind kind = Kind::forbid;
    /// Compute slowdown on a node whose memory is oversubscribed.
    double mem_spill_factor = 10.0;
    /// Stretch compute by demanded/available threads when threads are oversubscribed.
    bool thread_share = true;

    static Oversubscription forbid() { return {}; }
    static Oversubscription penalize(double spill = 10.0, bool thread_share = true) {
        return {Kind::penalize, spill, thread_share};
    }

    friend bool operator==(const Oversubscription&, const Oversubscription&) = default;
};

struct SimOptions {
    bool cache_enabled = false;
    Oversubscription oversubscription;
    /// Reserved; simulation results do not depend on it.
    std::uint64_t random_seed = 0;
    /// Per-GB cost of copying inputs into a task's working directory on a
    /// single machine.
    double local_copy_s_per_gb = 0.0;

    void check() const {
        if (oversubscription.mem_spill_factor < 1.0) throw InvalidArgument("mem_spill_factor must be >= 1");
        if (local_copy_s_per_gb < 0.0) throw InvalidArgument("negative local copy cost");
    }

    friend bool operator==(const SimOptions&, const SimOptions&) = default;
};

struct TraceEntry {
    std::string task_id;
    std::string template_name;
    std::string node_id;
    double start_s = 0.0;
    double end_s = 0.0;
    int threads = 0;
    double staged_in_gb = 0.0;
    double staged_out_gb = 0.0;
    bool cache_hit = false;
    /// Time spent in the compute phase (excludes staging).
    double compute_s = 0.0;

    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct SimTrace {
    std::vector<TraceEntry> entries;
};

struct TemplateTotals {
    std::size_t count = 0;
    double cpu_hours = 0.0;
    double gb_moved = 0.0;
    std::size_t cache_hits = 0;

    friend bool operator==(const TemplateTotals&, const TemplateTotals&) = default;
};

struct RunReport {
    std::string cluster;
    std::string policy;
    bool cache_enabled = false;
    double makespan_h = 0.0;
    std::size_t task_count = 0;
    std::map<std::string, TemplateTotals> per_template;
    std::vector<std::pair<std::string, double>> node_utilization;
    std::size_t cache_hits = 0;
    double total_network_gb = 0.0;

    // Cost basis carried along for the cost report.
    std::size_t node_count = 0;
    std::optional<int> alignment_node_cap;
    std::optional<double> acquisition_cost_eur;
    std::optional<double> per_run_rental_eur;
};

struct SimResult {
    SimTrace trace;
    RunReport report;
};

/// Amdahl-style duration: serial part plus the input-proportional part
/// divided across `threads`.
inline double task_duration_s(const TaskTemplate& tmpl, int threads, double input_gb) {
    if (threads < 1) throw InvalidArgument("thread count must be >= 1");
    if (threads > tmpl.threads.max_threads() || (!tmpl.threads.is_configurable() && threads != tmpl.threads.n)) {
        throw InvalidArgument("template " + tmpl.name + " cannot run with " + std::to_string(threads) + " threads");
    }
    return tmpl.work.serial_s + tmpl.work.parallel_s_per_gb * input_gb / threads;
}

namespace detail {

/// Everything the engine needs about one task, resolved to indices once.
struct CompiledTask {
    const TaskTemplate* tmpl = nullptr;
    std::vector<std::size_t> inputs;
    std::vector<std::size_t> outputs;
    std::vector<std::size_t> successors;
    double input_gb = 0.0;
    double mem_gb = 0.0;
    std::optional<int> default_threads;
    bool alignment_stage = false;
    std::size_t n_preds = 0;
    /// Empty when the task does not take part in caching.
    std::string signature;
};

struct CompiledRun {
    std::map<std::string, TaskTemplate> templates;
    std::vector<CompiledTask> tasks;
};

inline CompiledRun compile(const WorkflowDag& dag, const DagIndex& index, const ClusterSpec& cluster,
                           const Policy& policy, const ProfileSet& profiles, const SimOptions& options) {
    require_valid(dag, index);
    CompiledRun run;
    const ClusterTuning tuning = profiles.tuning(cluster.name);

    run.tasks.resize(dag.tasks.size());
    for (std::size_t i = 0; i < dag.tasks.size(); ++i) {
        const auto& src = dag.tasks[i];
        auto it = run.templates.find(src.template_name);
        if (it == run.templates.end()) {
            auto p = profiles.templates.find(src.template_name);
            if (p == profiles.templates.end()) {
                throw InvalidArgument("no profile for template '" + src.template_name + "'");
            }
            it = run.templates.emplace(src.template_name, p->second).first;
        }
        auto& t = run.tasks[i];
        t.tmpl = &it->second;
        t.inputs = index.inputs(i);
        t.outputs = index.outputs(i);
        for (auto f : t.inputs) t.input_gb += dag.files[f].size_gb;
        t.successors = index.successors(i);
        t.n_preds = index.predecessors(i).size();
        t.mem_gb = t.tmpl->memory.required_gb(t.input_gb);
        if (auto d = tuning.thread_defaults.find(src.template_name); d != tuning.thread_defaults.end()) {
            t.default_threads = d->second;
        }
        t.alignment_stage = is_alignment_template(src.template_name);
        if (options.cache_enabled && t.tmpl->deterministic) t.signature = signature(src);

        // A task that fits on no eligible node can never run.
        std::size_t eligible = cluster.nodes.size();
        if (t.alignment_stage && policy.alignment_node_cap) {
            eligible = std::min<std::size_t>(eligible, static_cast<std::size_t>(*policy.alignment_node_cap));
        }
        bool fits = false;
        for (std::size_t n = 0; n < eligible && !fits; ++n) {
            const auto& node = cluster.nodes[n];
            fits = node.mem_gb >= t.mem_gb - 1e-9 && node.threads >= t.tmpl->threads.min_threads();
        }
        if (!fits) {
            throw SimulationError("task " + src.id + " is unschedulable: needs " + std::to_string(t.mem_gb) +
                                  " GB and " + std::to_string(t.tmpl->threads.min_threads()) +
                                  " threads, more than any eligible node offers");
        }
    }
    return run;
}

} // namespace detail

/// Builds the aggregate report from a finished trace.
inline RunReport make_report(const SimTrace& trace, const ClusterSpec& cluster, const Policy& policy,
                             const SimOptions& options) {
    RunReport r;
    r.cluster = cluster.name;
    r.policy = to_string(policy.kind);
    r.cache_enabled = options.cache_enabled;
    r.task_count = trace.entries.size();
    r.node_count = cluster.nodes.size();
    r.alignment_node_cap = policy.alignment_node_cap;
    r.acquisition_cost_eur = cluster.acquisition_cost_eur;
    r.per_run_rental_eur = cluster.per_run_rental_eur;

    double end = 0.0;
    std::unordered_map<std::string, double> busy;
    for (const auto& e : trace.entries) {
        end = std::max(end, e.end_s);
        auto& tot = r.per_template[e.template_name];
        ++tot.count;
        tot.cpu_hours += e.threads * e.compute_s / 3600.0;
        tot.gb_moved += e.staged_in_gb + e.staged_out_gb;
        if (e.cache_hit) {
            ++tot.cache_hits;
            ++r.cache_hits;
        } else {
            busy[e.node_id] += e.threads * (e.end_s - e.start_s);
        }
        if (cluster.fs_regime != FsRegime::local_only) r.total_network_gb += e.staged_in_gb + e.staged_out_gb;
    }
    r.makespan_h = end / 3600.0;
    for (const auto& node : cluster.nodes) {
        const double u = end > 0.0 ? busy[node.id] / (node.threads * end) : 0.0;
        r.node_utilization.emplace_back(node.id, u);
    }
    return r;
}

/// Discrete-event execution of `dag` on `cluster`.
///
/// A task is ready once all producers have published. When assigned it holds
/// its threads and memory while it fetches inputs, computes and publishes
/// outputs, strictly in that order. Transfers on a node split the link
/// bandwidth evenly with those already in flight when they start. Events at
/// equal times are handled in task-index order, and the scheduler runs after
/// all events of an instant have been handled.
class Simulator {
public:
    Simulator(const WorkflowDag& dag, const ClusterSpec& cluster, const Policy& policy, const ProfileSet& profiles,
              const SimOptions& options)
        : Simulator(dag, DagIndex(dag), cluster, policy, profiles, options) {}

    /// Reuses a prebuilt index of `dag`.
    Simulator(const WorkflowDag& dag, const DagIndex& index, const ClusterSpec& cluster, const Policy& policy,
              const ProfileSet& profiles, const SimOptions& options)
        : dag_(dag), cluster_(cluster), policy_(policy), options_(options), fs_(dag) {
        cluster.check();
        policy.check();
        options.check();
        run_ = detail::compile(dag, index, cluster, policy, profiles, options);
        speed_ = profiles.tuning(cluster.name).speed;
        if (!(speed_ > 0.0)) throw InvalidArgument("cluster speed must be positive");
        strict_ = options.oversubscription.kind == Oversubscription::Kind::forbid;
        loads_ = empty_loads(cluster);
        node_factor_.assign(cluster.nodes.size(), 1.0);
        transfers_.assign(cluster.nodes.size(), 0);
        state_.resize(dag.tasks.size());
        place_workflow_inputs(dag, cluster, fs_);
    }

    SimResult run() {
        entries_.resize(dag_.tasks.size());
        for (std::size_t i = 0; i < run_.tasks.size(); ++i) {
            state_[i].preds_left = run_.tasks[i].n_preds;
        }
        for (std::size_t i = 0; i < run_.tasks.size(); ++i) {
            if (state_[i].preds_left == 0) make_ready(i, 0.0);
        }
        schedule(0.0);
        while (!events_.empty()) {
            const double now = events_.top().time;
            while (!events_.empty() && events_.top().time == now) {
                Event ev = events_.top();
                events_.pop();
                if (ev.version != state_[ev.task].version) continue;
                advance(ev.task, now);
            }
            schedule(now);
        }
        if (done_ != dag_.tasks.size()) {
            throw SimulationError("simulation stalled with " + std::to_string(dag_.tasks.size() - done_) +
                                  " unfinished tasks");
        }
        SimResult result;
        result.trace.entries = std::move(entries_);
        result.report = make_report(result.trace, cluster_, policy_, options_);
        return result;
    }

private:
    enum class Phase : std::uint8_t { waiting, ready, fetching, computing, publishing, done, awaiting_cache };

    struct TaskState {
        Phase phase = Phase::waiting;
        std::size_t preds_left = 0;
        std::size_t node = 0;
        int threads = 0;
        std::uint32_t version = 0;
        bool counted_transfer = false;
        bool claimed = false;
        double work_left = 0.0;
        double last_update = 0.0;
        double compute_start = 0.0;
    };

    struct Event {
        double time;
        std::size_t task;
        std::uint32_t version;
        bool operator>(const Event& o) const { return time != o.time ? time > o.time : task > o.task; }
    };

    void push(std::size_t task, double time) {
        events_.push({time, task, ++state_[task].version});
    }

    void make_ready(std::size_t i, double now) {
        const auto& t = run_.tasks[i];
        if (!t.signature.empty()) {
            if (auto hit = completed_.find(t.signature); hit != completed_.end()) {
                finish_from_cache(i, hit->second, now);
                return;
            }
            if (auto c = claimed_.find(t.signature); c != claimed_.end()) {
                state_[i].phase = Phase::awaiting_cache;
                waiters_[t.signature].push_back(i);
                return;
            }
            claimed_.emplace(t.signature, i);
            state_[i].claimed = true;
        }
        state_[i].phase = Phase::ready;
        ready_.push({i, t.tmpl, t.mem_gb, t.default_threads, t.alignment_stage, &t.inputs});
    }

    void finish_from_cache(std::size_t i, std::size_t original, double now) {
        const auto& t = run_.tasks[i];
        const auto& o = run_.tasks[original];
        // Outputs alias the original's replicas; any extra output is taken to
        // sit where the original ran.
        for (std::size_t k = 0; k < t.outputs.size(); ++k) {
            if (k < o.outputs.size()) {
                for (auto n : fs_.holders(o.outputs[k])) fs_.place(t.outputs[k], n);
            } else {
                fs_.place(t.outputs[k], state_[original].node);
            }
        }
        auto& e = entries_[i];
        e = TraceEntry{dag_.tasks[i].id, t.tmpl->name, cluster_.nodes[state_[original].node].id, now, now, 0, 0.0, 0.0, true, 0.0};
        complete(i, now);
    }

    void complete(std::size_t i, double now) {
        state_[i].phase = Phase::done;
        ++done_;
        const auto& t = run_.tasks[i];
        if (state_[i].claimed) {
            completed_.emplace(t.signature, i);
            if (auto w = waiters_.find(t.signature); w != waiters_.end()) {
                auto list = std::move(w->second);
                waiters_.erase(w);
                std::sort(list.begin(), list.end());
                for (auto j : list) finish_from_cache(j, i, now);
            }
        }
        for (auto s : t.successors) {
            if (--state_[s].preds_left == 0) make_ready(s, now);
        }
    }

    void schedule(double now) {
        if (ready_.empty()) return;
        auto assigned = select(ready_, loads_, cluster_, fs_, policy_, strict_);
        for (const auto& a : assigned) start(a, now);
        for (const auto& a : assigned) refresh_node(a.node, now);
    }

    void start(const Assignment& a, double now) {
        auto& st = state_[a.task];
        const auto& t = run_.tasks[a.task];
        st.node = a.node;
        st.threads = a.threads;
        st.phase = Phase::fetching;

        auto& e = entries_[a.task];
        e.task_id = dag_.tasks[a.task].id;
        e.template_name = t.tmpl->name;
        e.node_id = cluster_.nodes[a.node].id;
        e.start_s = now;
        e.threads = a.threads;

        const StagePlan plan = stage_plan(t.inputs, t.outputs, a.node, fs_, cluster_.fs_regime);
        e.staged_in_gb = plan.fetch_gb();
        e.staged_out_gb = plan.publish_gb();
        double dur = 0.0;
        if (cluster_.fs_regime == FsRegime::local_only) {
            dur = options_.local_copy_s_per_gb * t.input_gb;
        } else {
            dur = begin_transfer(st, e.staged_in_gb);
        }
        push(a.task, now + dur);
    }

    double begin_transfer(TaskState& st, double gb) {
        st.counted_transfer = false;
        if (gb <= 0.0) return 0.0;
        const int share = ++transfers_[st.node];
        st.counted_transfer = true;
        return transfer_time_s(gb, cluster_.network_gbit, share);
    }

    void end_transfer(TaskState& st) {
        if (st.counted_transfer) --transfers_[st.node];
        st.counted_transfer = false;
    }

    void advance(std::size_t i, double now) {
        auto& st = state_[i];
        const auto& t = run_.tasks[i];
        switch (st.phase) {
            case Phase::fetching: {
                end_transfer(st);
                if (cluster_.fs_regime == FsRegime::staged_dfs) {
                    for (auto f : t.inputs) fs_.place(f, st.node);
                }
                st.phase = Phase::computing;
                st.compute_start = now;
                st.work_left = task_duration_s(*t.tmpl, st.threads, t.input_gb) / speed_;
                st.last_update = now;
                push(i, now + st.work_left * node_factor_[st.node]);
                break;
            }
            case Phase::computing: {
                entries_[i].compute_s = now - st.compute_start;
                st.phase = Phase::publishing;
                const double dur = cluster_.fs_regime == FsRegime::local_only ? 0.0 : begin_transfer(st, entries_[i].staged_out_gb);
                push(i, now + dur);
                break;
            }
            case Phase::publishing: {
                end_transfer(st);
                for (auto f : t.outputs) fs_.place(f, st.node);
                auto& load = loads_[st.node];
                load.threads_in_use -= st.threads;
                load.mem_gb_in_use -= t.mem_gb;
                if (load.mem_gb_in_use < 1e-9) load.mem_gb_in_use = 0.0;
                load.running.erase(std::find(load.running.begin(), load.running.end(), i));
                entries_[i].end_s = now;
                refresh_node(st.node, now);
                complete(i, now);
                break;
            }
            default:
                throw SimulationError("unexpected event for task " + dag_.tasks[i].id);
        }
    }

    /// Re-rates compute phases on a node whose oversubscription factor changed.
    void refresh_node(std::size_t n, double now) {
        if (strict_) return;
        const auto& node = cluster_.nodes[n];
        const auto& load = loads_[n];
        double factor = 1.0;
        if (options_.oversubscription.thread_share && load.threads_in_use > node.threads) {
            factor *= static_cast<double>(load.threads_in_use) / node.threads;
        }
        if (load.mem_gb_in_use > node.mem_gb + 1e-9) factor *= options_.oversubscription.mem_spill_factor;
        const double old = node_factor_[n];
        if (factor == old) return;
        node_factor_[n] = factor;
        for (auto i : load.running) {
            auto& st = state_[i];
            if (st.phase != Phase::computing) continue;
            st.work_left = std::max(0.0, st.work_left - (now - st.last_update) / old);
            st.last_update = now;
            push(i, now + st.work_left * factor);
        }
    }

    const WorkflowDag& dag_;
    const ClusterSpec& cluster_;
    Policy policy_;
    SimOptions options_;
    detail::CompiledRun run_;
    FsState fs_;
    double speed_ = 1.0;
    bool strict_ = true;

    std::vector<NodeLoad> loads_;
    std::vector<double> node_factor_;
    std::vector<int> transfers_;
    std::vector<TaskState> state_;
    std::vector<TraceEntry> entries_;
    ReadyQueue ready_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
    std::unordered_map<std::string, std::size_t> claimed_;
    std::unordered_map<std::string, std::size_t> completed_;
    std::unordered_map<std::string, std::vector<std::size_t>> waiters_;
    std::size_t done_ = 0;
};

inline SimResult simulate(const WorkflowDag& dag, const ClusterSpec& cluster, const Policy& policy,
                          const ProfileSet& profiles, const SimOptions& options = {}) {
    return Simulator(dag, cluster, policy, profiles, options).run();
}

// ---------------------------------------------------------------------------
// Trace export
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

} // namespace detail

/// CSV with header `task_id,template,node,start_s,end_s,threads,cache_hit`,
/// rows sorted by start time then task id, LF line endings.
inline std::string export_trace_csv(const SimTrace& trace) {
    std::vector<const TraceEntry*> rows;
    rows.reserve(trace.entries.size());
    for (const auto& e : trace.entries) rows.push_back(&e);
    std::sort(rows.begin(), rows.end(), [](const TraceEntry* a, const TraceEntry* b) {
        return a->start_s != b->start_s ? a->start_s < b->start_s : a->task_id < b->task_id;
    });
    std::string out = "task_id,template,node,start_s,end_s,threads,cache_hit\n";
    out.reserve(out.size() + rows.size() * 64);
    for (const auto* e : rows) {
        out += e->task_id;
        out += ',';
        out += e->template_name;
        out += ',';
        out += e->node_id;
        out += ',';
        out += detail::fixed3(e->start_s);
        out += ',';
        out += detail::fixed3(e->end_s);
        out += ',';
        out += std::to_string(e->threads);
        out += ',';
        out += e->cache_hit ? '1' : '0';
        out += '\n';
    }
    return out;
}

} // namespace wesim
