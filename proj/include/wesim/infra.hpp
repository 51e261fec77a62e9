#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wesim/error.hpp"
#include "wesim/workflow.hpp"

namespace wesim {

enum class FsRegime {
    /// Single machine, all files on local disk.
    local_only,
    /// POSIX parallel file system; every read and write crosses the network.
    shared_posix,
    /// Non-POSIX distributed store; inputs are copied to the executing node
    /// and outputs copied back.
    staged_dfs,
};

inline const char* to_string(FsRegime r) {
    switch (r) {
        case FsRegime::local_only: return "local_only";
        case FsRegime::shared_posix: return "shared_posix";
        case FsRegime::staged_dfs: return "staged_dfs";
    }
    return "unknown";
}

struct NodeSpec {
    std::string id;
    int threads = 1;
    double mem_gb = 1.0;
    std::string class_label;

    friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

struct ClusterSpec {
    std::string name;
    std::vector<NodeSpec> nodes;
    /// Link bandwidth per node; 0 for a single machine.
    double network_gbit = 0.0;
    FsRegime fs_regime = FsRegime::local_only;
    std::optional<double> acquisition_cost_eur;
    std::optional<double> per_run_rental_eur;

    int total_threads() const {
        int n = 0;
        for (const auto& node : nodes) n += node.threads;
        return n;
    }
    double total_mem_gb() const {
        double m = 0.0;
        for (const auto& node : nodes) m += node.mem_gb;
        return m;
    }

    void check() const {
        if (nodes.empty()) throw InvalidArgument("cluster '" + name + "' has no nodes");
        for (const auto& n : nodes) {
            if (n.threads < 1) throw InvalidArgument("node " + n.id + " has no threads");
            if (!(n.mem_gb > 0.0)) throw InvalidArgument("node " + n.id + " has no memory");
        }
        if (network_gbit < 0.0) throw InvalidArgument("negative bandwidth");
        if (fs_regime != FsRegime::local_only && !(network_gbit > 0.0)) {
            throw InvalidArgument("cluster '" + name + "' moves data but has zero bandwidth");
        }
    }

    /// Cost analysis needs exactly one of acquisition or rental cost.
    void check_cost_basis() const {
        if (acquisition_cost_eur.has_value() == per_run_rental_eur.has_value()) {
            throw InvalidArgument("cluster '" + name + "' needs exactly one of acquisition or rental cost");
        }
    }

    friend bool operator==(const ClusterSpec&, const ClusterSpec&) = default;
};

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Node counts per memory class of the HPC preset (128/188/500/1000 GB).
struct HpcMemoryMix {
    int n128 = 60;
    int n188 = 30;
    int n500 = 15;
    int n1000 = 6;
};

namespace detail {

inline std::string node_id(const char* prefix, std::size_t i, std::size_t count) {
    char buf[32];
    const int width = count > 99 ? 3 : 2;
    std::snprintf(buf, sizeof buf, "%s-%0*zu", prefix, width, i);
    return buf;
}

} // namespace detail

/// HPC cluster: 111 nodes, 3,784 threads. Per-node thread counts are not
/// published; the first 82 nodes get 32 threads and the remaining 29 get 40,
/// which adds up to the published total.
inline ClusterSpec hpc_preset(const HpcMemoryMix& mix = {}) {
    const int total = mix.n128 + mix.n188 + mix.n500 + mix.n1000;
    if (total != 111 || mix.n128 < 0 || mix.n188 < 0 || mix.n500 < 0 || mix.n1000 < 0) {
        throw InvalidArgument("HPC memory mix must cover exactly 111 nodes");
    }
    ClusterSpec c;
    c.name = "HPC";
    c.network_gbit = 64.0;
    c.fs_regime = FsRegime::shared_posix;
    c.acquisition_cost_eur = 800000.0;
    const std::pair<int, double> classes[] = {{mix.n128, 128.0}, {mix.n188, 188.0}, {mix.n500, 500.0}, {mix.n1000, 1000.0}};
    for (const auto& [count, mem] : classes) {
        for (int i = 0; i < count; ++i) {
            const std::size_t idx = c.nodes.size();
            const int threads = idx < 82 ? 32 : 40;
            c.nodes.push_back({detail::node_id("hpc", idx, 111), threads, mem, std::to_string(static_cast<int>(mem)) + "G"});
        }
    }
    return c;
}

inline ClusterSpec preset(std::string_view name) {
    ClusterSpec c;
    if (name == "SA") {
        c.name = "SA";
        c.nodes.push_back({"sa-00", 80, 512.0, "standalone"});
        c.network_gbit = 0.0;
        c.fs_regime = FsRegime::local_only;
        c.acquisition_cost_eur = 11000.0;
    } else if (name == "YC") {
        // 552 threads on 23 nodes; 12 nodes with 24 GB and 11 with 36 GB.
        c.name = "YC";
        for (std::size_t i = 0; i < 23; ++i) {
            const bool small = i < 12;
            c.nodes.push_back({detail::node_id("yc", i, 23), 24, small ? 24.0 : 36.0, small ? "24G" : "36G"});
        }
        c.network_gbit = 10.0;
        c.fs_regime = FsRegime::staged_dfs;
        c.acquisition_cost_eur = 100000.0;
    } else if (name == "HPC") {
        return hpc_preset();
    } else if (name == "EC2") {
        // 16 rented r3.4xlarge instances (16 vCPUs, 122 GB each).
        c.name = "EC2";
        for (std::size_t i = 0; i < 16; ++i) c.nodes.push_back({detail::node_id("ec2", i, 16), 16, 122.0, "r3.4xlarge"});
        c.network_gbit = 10.0;
        c.fs_regime = FsRegime::staged_dfs;
        c.per_run_rental_eur = 500.0;
    } else {
        throw InvalidArgument("unknown cluster preset '" + std::string(name) + "'");
    }
    return c;
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"SA", "YC", "HPC", "EC2"};
    return names;
}

// ---------------------------------------------------------------------------
// Network and file placement
// ---------------------------------------------------------------------------

/// Seconds to move `size_gb` over a link of `bandwidth_gbit` shared fairly by
/// `concurrent_share` transfers.
inline double transfer_time_s(double size_gb, double bandwidth_gbit, int concurrent_share) {
    if (size_gb < 0.0) throw InvalidArgument("negative transfer size");
    if (concurrent_share < 1) throw InvalidArgument("transfer share must be >= 1");
    if (size_gb == 0.0) return 0.0;
    if (!(bandwidth_gbit > 0.0)) throw InvalidArgument("transfer over a zero-bandwidth link");
    return size_gb * 8.0 / (bandwidth_gbit / concurrent_share);
}

/// Replica placement of every file of one DAG, by node index.
class FsState {
public:
    explicit FsState(const WorkflowDag& dag) : dag_(&dag) {
        sizes_.reserve(dag.files.size());
        for (const auto& f : dag.files) sizes_.push_back(f.size_gb);
        replicas_.resize(dag.files.size());
    }

    std::size_t file_count() const { return sizes_.size(); }
    double size_gb(std::size_t file) const { return sizes_[file]; }

    /// Id lookups refer back to the DAG, which must outlive this object.
    std::size_t index_of(const std::string& id) const {
        if (ids_.empty()) {
            ids_.reserve(dag_->files.size());
            for (std::size_t i = 0; i < dag_->files.size(); ++i) ids_.emplace(dag_->files[i].id, i);
        }
        auto it = ids_.find(id);
        if (it == ids_.end()) throw InvalidArgument("unknown file " + id);
        return it->second;
    }

    void place(std::size_t file, std::size_t node) {
        auto& r = replicas_[file];
        auto it = std::lower_bound(r.begin(), r.end(), node);
        if (it == r.end() || *it != node) r.insert(it, node);
    }
    void place(const std::string& id, std::size_t node) { place(index_of(id), node); }

    bool resident(std::size_t file, std::size_t node) const {
        const auto& r = replicas_[file];
        return std::binary_search(r.begin(), r.end(), node);
    }
    const std::vector<std::size_t>& holders(std::size_t file) const { return replicas_[file]; }
    const std::vector<std::size_t>& holders(const std::string& id) const { return replicas_[index_of(id)]; }

private:
    const WorkflowDag* dag_;
    std::vector<double> sizes_;
    mutable std::unordered_map<std::string, std::size_t> ids_;
    std::vector<std::vector<std::size_t>> replicas_;
};

/// Places workflow inputs: everything on node 0 for a single machine or a
/// shared file system, round-robin by file order for a staged store.
inline void place_workflow_inputs(const WorkflowDag& dag, const ClusterSpec& cluster, FsState& fs) {
    std::size_t next = 0;
    for (std::size_t i = 0; i < dag.files.size(); ++i) {
        if (dag.files[i].producer) continue;
        if (cluster.fs_regime == FsRegime::staged_dfs) {
            fs.place(i, next % cluster.nodes.size());
            ++next;
        } else {
            fs.place(i, 0);
        }
    }
}

struct Transfer {
    std::size_t file = 0;
    double size_gb = 0.0;

    friend bool operator==(const Transfer&, const Transfer&) = default;
};

struct StagePlan {
    std::vector<Transfer> fetch;
    std::vector<Transfer> publish;

    double fetch_gb() const { return sum(fetch); }
    double publish_gb() const { return sum(publish); }

private:
    static double sum(const std::vector<Transfer>& ts) {
        double s = 0.0;
        for (const auto& t : ts) s += t.size_gb;
        return s;
    }
};

/// Index-based staging plan used by the simulator.
inline StagePlan stage_plan(const std::vector<std::size_t>& inputs, const std::vector<std::size_t>& outputs,
                            std::size_t node, const FsState& fs, FsRegime regime) {
    StagePlan plan;
    if (regime == FsRegime::local_only) return plan;
    for (auto f : inputs) {
        if (regime == FsRegime::staged_dfs) {
            if (fs.holders(f).empty()) throw InvalidArgument("input file has no replica on any node");
            if (fs.resident(f, node)) continue;
        }
        plan.fetch.push_back({f, fs.size_gb(f)});
    }
    for (auto f : outputs) plan.publish.push_back({f, fs.size_gb(f)});
    return plan;
}

/// Data movement needed to run `task` on node index `node`.
inline StagePlan stage_plan(const TaskInstance& task, std::size_t node, const FsState& fs, FsRegime regime) {
    std::vector<std::size_t> in, out;
    for (const auto& id : task.inputs) in.push_back(fs.index_of(id));
    for (const auto& id : task.outputs) out.push_back(fs.index_of(id));
    return stage_plan(in, out, node, fs, regime);
}

/// Fraction of input bytes already on `node`; 1 when there is nothing to read.
inline double locality_score(const std::vector<std::size_t>& inputs, std::size_t node, const FsState& fs) {
    double total = 0.0, resident = 0.0;
    for (auto f : inputs) {
        total += fs.size_gb(f);
        if (fs.resident(f, node)) resident += fs.size_gb(f);
    }
    return total > 0.0 ? resident / total : 1.0;
}

inline double locality_score(const TaskInstance& task, std::size_t node, const FsState& fs) {
    std::vector<std::size_t> in;
    for (const auto& id : task.inputs) in.push_back(fs.index_of(id));
    return locality_score(in, node, fs);
}

} // namespace wesim
