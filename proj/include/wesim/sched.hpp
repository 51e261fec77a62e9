#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "wesim/error.hpp"
#include "wesim/infra.hpp"
#include "wesim/workflow.hpp"

namespace wesim {

struct Policy {
    enum class Kind {
        /// Uniform load: lowest thread utilization among feasible nodes.
        sge_load_balance,
        /// Data-aware: highest share of resident input bytes.
        hiway_locality,
        /// One global cap on concurrently running tasks, blind to memory.
        local_max_concurrency,
        /// Admit while memory fits, and threads too unless they may
        /// oversubscribe.
        local_memory_aware,
    };

    Kind kind = Kind::sge_load_balance;
    /// Cap for local_max_concurrency.
    int max_concurrency = 0;
    /// Restrict alignment-stage tasks to the first `cap` nodes.
    std::optional<int> alignment_node_cap;

    static Policy sge_load_balance(std::optional<int> cap = std::nullopt) { return {Kind::sge_load_balance, 0, cap}; }
    static Policy hiway_locality() { return {Kind::hiway_locality, 0, std::nullopt}; }
    static Policy local_max_concurrency(int k) { return {Kind::local_max_concurrency, k, std::nullopt}; }
    static Policy local_memory_aware() { return {Kind::local_memory_aware, 0, std::nullopt}; }

    void check() const {
        if (kind == Kind::local_max_concurrency && max_concurrency < 1) {
            throw InvalidArgument("local_max_concurrency needs k >= 1");
        }
        if (alignment_node_cap && *alignment_node_cap < 1) throw InvalidArgument("alignment node cap must be >= 1");
    }

    friend bool operator==(const Policy&, const Policy&) = default;
};

inline const char* to_string(Policy::Kind k) {
    switch (k) {
        case Policy::Kind::sge_load_balance: return "sge_load_balance";
        case Policy::Kind::hiway_locality: return "hiway_locality";
        case Policy::Kind::local_max_concurrency: return "local_max_concurrency";
        case Policy::Kind::local_memory_aware: return "local_memory_aware";
    }
    return "unknown";
}

inline Policy::Kind policy_kind_from_string(const std::string& s) {
    for (auto k : {Policy::Kind::sge_load_balance, Policy::Kind::hiway_locality, Policy::Kind::local_max_concurrency,
                   Policy::Kind::local_memory_aware}) {
        if (s == to_string(k)) return k;
    }
    throw InvalidArgument("unknown policy '" + s + "'");
}

struct NodeLoad {
    std::size_t node = 0;
    int threads_in_use = 0;
    double mem_gb_in_use = 0.0;
    std::vector<std::size_t> running;

    friend bool operator==(const NodeLoad&, const NodeLoad&) = default;
};

inline std::vector<NodeLoad> empty_loads(const ClusterSpec& cluster) {
    std::vector<NodeLoad> loads(cluster.nodes.size());
    for (std::size_t i = 0; i < loads.size(); ++i) loads[i].node = i;
    return loads;
}

/// Resource demand of a ready task as seen by the scheduler.
struct ReadyTask {
    /// Position in the DAG; the scheduler serves lower indices first.
    std::size_t index = 0;
    const TaskTemplate* tmpl = nullptr;
    double mem_gb = 0.0;
    /// Thread allotment preset for configurable templates.
    std::optional<int> default_threads;
    bool alignment_stage = false;
    /// Input file indices into the FsState.
    const std::vector<std::size_t>* inputs = nullptr;
};

struct Assignment {
    std::size_t task = 0;
    std::size_t node = 0;
    int threads = 1;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// True iff `node` has room for the task's minimum threads and its memory.
inline bool feasible(const TaskTemplate& tmpl, double mem_gb, const NodeSpec& node, const NodeLoad& load) {
    const int free_threads = node.threads - load.threads_in_use;
    const double free_mem = node.mem_gb - load.mem_gb_in_use;
    return free_threads >= tmpl.threads.min_threads() && free_threads >= 1 && free_mem >= mem_gb - 1e-9;
}

/// Ready tasks grouped by identical resource demand. Within a scheduling
/// round every task of a group is feasible on exactly the same nodes, so a
/// group whose head fits nowhere can be skipped as a whole.
class ReadyQueue {
public:
    void push(const ReadyTask& t) {
        Key key{t.tmpl, t.mem_gb, t.default_threads.value_or(-1), t.alignment_stage};
        auto [it, inserted] = group_of_.try_emplace(key, groups_.size());
        if (inserted) groups_.push_back(Group{t, {}});
        groups_[it->second].tasks.emplace(t.index, t.inputs);
        ++size_;
    }

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    /// All queued tasks in index order.
    std::vector<ReadyTask> tasks() const {
        std::vector<ReadyTask> out;
        for (const auto& g : groups_) {
            for (const auto& [idx, inputs] : g.tasks) {
                ReadyTask t = g.proto;
                t.index = idx;
                t.inputs = inputs;
                out.push_back(t);
            }
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
        return out;
    }

private:
    friend std::vector<Assignment> select(ReadyQueue&, std::vector<NodeLoad>&, const ClusterSpec&, const FsState&,
                                          const Policy&, bool);

    using Key = std::tuple<const TaskTemplate*, double, int, bool>;
    struct Group {
        ReadyTask proto;
        std::map<std::size_t, const std::vector<std::size_t>*> tasks;
    };

    std::map<Key, std::size_t> group_of_;
    std::vector<Group> groups_;
    std::size_t size_ = 0;
};

namespace detail {

inline double utilization(const NodeSpec& node, const NodeLoad& load) {
    return static_cast<double>(load.threads_in_use) / node.threads;
}

inline int allot_threads(const ReadyTask& t, const NodeSpec& node, const NodeLoad& load, std::size_t group_remaining,
                         int concurrency_left, bool strict) {
    const TaskTemplate& tmpl = *t.tmpl;
    if (!tmpl.threads.is_configurable()) return tmpl.threads.n;
    const int max_n = tmpl.threads.max_threads();
    if (t.default_threads) {
        const int want = std::min(max_n, *t.default_threads);
        if (!strict) return std::max(1, want);
        return std::max(1, std::min(want, node.threads - load.threads_in_use));
    }
    // Fair share: split the free threads over the instances of this group the
    // node can still host (bounded by memory, queue length and any cap).
    const int threads = strict ? node.threads - load.threads_in_use : node.threads;
    const double mem_left = strict ? node.mem_gb - load.mem_gb_in_use : node.mem_gb;
    std::size_t slots = group_remaining;
    if (t.mem_gb > 0.0) {
        slots = std::min<std::size_t>(slots, static_cast<std::size_t>(std::max(1.0, std::floor(mem_left / t.mem_gb + 1e-9))));
    }
    if (concurrency_left > 0) slots = std::min<std::size_t>(slots, static_cast<std::size_t>(concurrency_left));
    slots = std::max<std::size_t>(slots, 1);
    return std::clamp(threads / static_cast<int>(slots), 1, max_n);
}

} // namespace detail

/// Greedy assignment of queued tasks to nodes. Tasks are visited in index
/// order; each goes to the policy's preferred feasible node, or stays queued.
/// Assigned tasks are removed from `queue` and charged to `loads`.
///
/// With `strict` false (oversubscription allowed), local_max_concurrency
/// admits up to its cap without checking threads or memory and
/// local_memory_aware checks memory only; every other policy still only uses
/// feasible nodes.
inline std::vector<Assignment> select(ReadyQueue& queue, std::vector<NodeLoad>& loads, const ClusterSpec& cluster,
                                      const FsState& fs, const Policy& policy, bool strict = true) {
    policy.check();
    if (loads.size() != cluster.nodes.size()) throw InvalidArgument("load vector does not match cluster");
    int running_total = 0;
    for (std::size_t i = 0; i < loads.size(); ++i) {
        const auto& l = loads[i];
        if (l.node != i || l.threads_in_use < 0 || l.mem_gb_in_use < -1e-9 ||
            l.running.size() > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
            throw InvalidArgument("inconsistent load state on node " + cluster.nodes[i].id);
        }
        if (strict && (l.threads_in_use > cluster.nodes[i].threads || l.mem_gb_in_use > cluster.nodes[i].mem_gb + 1e-9)) {
            throw InvalidArgument("node " + cluster.nodes[i].id + " is over capacity in strict mode");
        }
        running_total += static_cast<int>(l.running.size());
    }

    const bool capped = policy.kind == Policy::Kind::local_max_concurrency;
    const bool blind = capped && !strict;
    const bool memory_only = policy.kind == Policy::Kind::local_memory_aware && !strict;
    const bool locality = policy.kind == Policy::Kind::hiway_locality && cluster.fs_regime == FsRegime::staged_dfs;

    std::vector<Assignment> out;
    using Head = std::pair<std::size_t, std::size_t>;  // (task index, group)
    std::priority_queue<Head, std::vector<Head>, std::greater<>> heads;
    for (std::size_t g = 0; g < queue.groups_.size(); ++g) {
        if (!queue.groups_[g].tasks.empty()) heads.emplace(queue.groups_[g].tasks.begin()->first, g);
    }

    while (!heads.empty()) {
        if (capped && running_total >= policy.max_concurrency) break;
        auto [idx, g] = heads.top();
        heads.pop();
        auto& group = queue.groups_[g];
        ReadyTask t = group.proto;
        t.index = idx;
        t.inputs = group.tasks.begin()->second;

        std::size_t eligible = cluster.nodes.size();
        if (t.alignment_stage && policy.alignment_node_cap) {
            eligible = std::min<std::size_t>(eligible, static_cast<std::size_t>(*policy.alignment_node_cap));
        }

        std::optional<std::size_t> best;
        double best_score = -1.0, best_util = 0.0;
        for (std::size_t n = 0; n < eligible; ++n) {
            const auto& node = cluster.nodes[n];
            if (memory_only) {
                if (node.mem_gb - loads[n].mem_gb_in_use < t.mem_gb - 1e-9) continue;
            } else if (!blind && !feasible(*t.tmpl, t.mem_gb, node, loads[n])) {
                continue;
            }
            const double util = detail::utilization(node, loads[n]);
            const double score = locality && t.inputs ? locality_score(*t.inputs, n, fs) : 0.0;
            const bool better = !best || score > best_score || (score == best_score && util < best_util);
            if (better) {
                best = n;
                best_score = score;
                best_util = util;
            }
        }
        if (!best) continue;  // the whole group is blocked for this round

        const int conc_left = capped ? policy.max_concurrency - running_total : 0;
        const int threads = detail::allot_threads(t, cluster.nodes[*best], loads[*best], group.tasks.size(), conc_left,
                                                    !blind && !memory_only);
        auto& load = loads[*best];
        load.threads_in_use += threads;
        load.mem_gb_in_use += t.mem_gb;
        load.running.push_back(idx);
        ++running_total;
        out.push_back({idx, *best, threads});

        group.tasks.erase(group.tasks.begin());
        --queue.size_;
        if (!group.tasks.empty()) heads.emplace(group.tasks.begin()->first, g);
    }
    return out;
}

/// Convenience form over a plain list; inputs are left untouched.
inline std::vector<Assignment> select(const std::vector<ReadyTask>& ready, std::vector<NodeLoad> loads,
                                      const ClusterSpec& cluster, const FsState& fs, const Policy& policy,
                                      bool strict = true) {
    ReadyQueue q;
    for (const auto& t : ready) q.push(t);
    return select(q, loads, cluster, fs, policy, strict);
}

} // namespace wesim
