#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wesim/error.hpp"

namespace wesim {

// ---------------------------------------------------------------------------
// Task templates
// ---------------------------------------------------------------------------

struct ThreadModel {
    enum class Kind { fixed, configurable };

    Kind kind = Kind::fixed;
    /// Thread count for `fixed`, upper bound for `configurable`.
    int n = 1;

    static ThreadModel fixed(int n) { return {Kind::fixed, n}; }
    static ThreadModel configurable(int max_n) { return {Kind::configurable, max_n}; }

    bool is_configurable() const { return kind == Kind::configurable; }
    int max_threads() const { return n; }
    int min_threads() const { return is_configurable() ? 1 : n; }

    friend bool operator==(const ThreadModel&, const ThreadModel&) = default;
};

struct MemoryModel {
    enum class Kind { fixed, base_plus_per_input };

    Kind kind = Kind::fixed;
    double base_gb = 0.0;
    double per_input_gb = 0.0;

    static MemoryModel fixed(double gb) { return {Kind::fixed, gb, 0.0}; }
    static MemoryModel base_plus_per_input(double base, double per_gb) {
        return {Kind::base_plus_per_input, base, per_gb};
    }

    double required_gb(double input_gb) const {
        return kind == Kind::fixed ? base_gb : base_gb + per_input_gb * input_gb;
    }

    friend bool operator==(const MemoryModel&, const MemoryModel&) = default;
};

/// Amdahl-style work split: a serial part plus a part that scales with the
/// input volume and is divided across the allotted threads.
struct WorkModel {
    double serial_s = 0.0;
    double parallel_s_per_gb = 0.0;

    friend bool operator==(const WorkModel&, const WorkModel&) = default;
};

/// Total output volume as an affine function of total input volume.
struct OutputSizeModel {
    double base_gb = 0.0;
    double ratio = 0.0;

    double operator()(double input_gb) const { return base_gb + ratio * input_gb; }

    friend bool operator==(const OutputSizeModel&, const OutputSizeModel&) = default;
};

struct TaskTemplate {
    std::string name;
    ThreadModel threads;
    MemoryModel memory;
    WorkModel work;
    bool deterministic = true;
    OutputSizeModel output_size;

    friend bool operator==(const TaskTemplate&, const TaskTemplate&) = default;
};

// ---------------------------------------------------------------------------
// DAG
// ---------------------------------------------------------------------------

struct FileArtifact {
    std::string id;
    double size_gb = 0.0;
    /// Id of the producing task; empty for workflow inputs.
    std::optional<std::string> producer;

    friend bool operator==(const FileArtifact&, const FileArtifact&) = default;
};

using Param = std::pair<std::string, std::string>;

struct TaskInstance {
    std::string id;
    std::string template_name;
    std::vector<std::string> inputs;
    std::vector<Param> params;
    std::vector<std::string> outputs;

    friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

struct WorkflowDag {
    std::vector<TaskTemplate> templates;
    std::vector<FileArtifact> files;
    std::vector<TaskInstance> tasks;

    const TaskTemplate* find_template(const std::string& name) const {
        for (const auto& t : templates) {
            if (t.name == name) return &t;
        }
        return nullptr;
    }

    friend bool operator==(const WorkflowDag&, const WorkflowDag&) = default;
};

struct Violation {
    enum class Kind {
        cycle,
        dangling_reference,
        duplicate_id,
        producer_mismatch,
        multiple_producers,
        negative_size,
        unknown_template,
    };

    Kind kind;
    std::string detail;
};

inline const char* to_string(Violation::Kind k) {
    switch (k) {
        case Violation::Kind::cycle: return "cycle";
        case Violation::Kind::dangling_reference: return "dangling_reference";
        case Violation::Kind::duplicate_id: return "duplicate_id";
        case Violation::Kind::producer_mismatch: return "producer_mismatch";
        case Violation::Kind::multiple_producers: return "multiple_producers";
        case Violation::Kind::negative_size: return "negative_size";
        case Violation::Kind::unknown_template: return "unknown_template";
    }
    return "unknown";
}

/// Index-based view of a DAG: id lookups, task-level dependency edges and a
/// topological order. Dangling references are dropped from the edge lists.
class DagIndex {
public:
    explicit DagIndex(const WorkflowDag& dag) {
        file_index_.reserve(dag.files.size());
        for (std::size_t i = 0; i < dag.files.size(); ++i) {
            if (!file_index_.emplace(dag.files[i].id, i).second) duplicate_files_.push_back(i);
        }
        task_index_.reserve(dag.tasks.size());
        for (std::size_t i = 0; i < dag.tasks.size(); ++i) {
            if (!task_index_.emplace(dag.tasks[i].id, i).second) duplicate_tasks_.push_back(i);
        }

        file_producer_.assign(dag.files.size(), npos);
        producer_count_.assign(dag.files.size(), 0);
        output_files_.resize(dag.tasks.size());
        input_files_.resize(dag.tasks.size());
        for (std::size_t t = 0; t < dag.tasks.size(); ++t) {
            for (const auto& out : dag.tasks[t].outputs) {
                auto f = file(out);
                output_files_[t].push_back(f ? *f : npos);
                if (!f) continue;
                if (producer_count_[*f]++ == 0) file_producer_[*f] = t;
            }
            for (const auto& in : dag.tasks[t].inputs) {
                auto f = file(in);
                input_files_[t].push_back(f ? *f : npos);
            }
        }

        predecessors_.resize(dag.tasks.size());
        successors_.resize(dag.tasks.size());
        for (std::size_t t = 0; t < dag.tasks.size(); ++t) {
            auto& preds = predecessors_[t];
            for (auto f : input_files_[t]) {
                if (f == npos || file_producer_[f] == npos) continue;
                preds.push_back(file_producer_[f]);
            }
            std::sort(preds.begin(), preds.end());
            preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
            for (auto p : preds) successors_[p].push_back(t);
        }

        // Kahn's algorithm, lowest index first so the order is canonical.
        std::vector<std::size_t> indegree(dag.tasks.size());
        for (std::size_t t = 0; t < dag.tasks.size(); ++t) indegree[t] = predecessors_[t].size();
        std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
        for (std::size_t t = 0; t < dag.tasks.size(); ++t) {
            if (indegree[t] == 0) ready.push(t);
        }
        while (!ready.empty()) {
            auto t = ready.top();
            ready.pop();
            topo_.push_back(t);
            for (auto s : successors_[t]) {
                if (--indegree[s] == 0) ready.push(s);
            }
        }
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::optional<std::size_t> file(const std::string& id) const {
        auto it = file_index_.find(id);
        if (it == file_index_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<std::size_t> task(const std::string& id) const {
        auto it = task_index_.find(id);
        if (it == task_index_.end()) return std::nullopt;
        return it->second;
    }

    /// Producing task of a file, or npos for workflow inputs.
    std::size_t producer_of(std::size_t file) const { return file_producer_[file]; }
    /// Number of tasks listing the file as an output.
    std::size_t producer_count(std::size_t file) const { return producer_count_[file]; }
    /// File indices of a task's inputs/outputs; npos marks a dangling id.
    const std::vector<std::size_t>& inputs(std::size_t task) const { return input_files_[task]; }
    const std::vector<std::size_t>& outputs(std::size_t task) const { return output_files_[task]; }
    const std::vector<std::size_t>& predecessors(std::size_t task) const { return predecessors_[task]; }
    const std::vector<std::size_t>& successors(std::size_t task) const { return successors_[task]; }

    const std::vector<std::size_t>& duplicate_files() const { return duplicate_files_; }
    const std::vector<std::size_t>& duplicate_tasks() const { return duplicate_tasks_; }

    bool acyclic() const { return topo_.size() == predecessors_.size(); }
    /// Complete only when acyclic().
    const std::vector<std::size_t>& topological_order() const { return topo_; }

private:
    std::unordered_map<std::string, std::size_t> file_index_;
    std::unordered_map<std::string, std::size_t> task_index_;
    std::vector<std::size_t> duplicate_files_;
    std::vector<std::size_t> duplicate_tasks_;
    std::vector<std::size_t> file_producer_;
    std::vector<std::size_t> producer_count_;
    std::vector<std::vector<std::size_t>> input_files_;
    std::vector<std::vector<std::size_t>> output_files_;
    std::vector<std::vector<std::size_t>> predecessors_;
    std::vector<std::vector<std::size_t>> successors_;
    std::vector<std::size_t> topo_;
};

/// Every violated structural invariant of `dag`; empty iff executable.
inline std::vector<Violation> validate(const WorkflowDag& dag, const DagIndex& index) {
    std::vector<Violation> out;
    auto report = [&](Violation::Kind k, std::string detail) { out.push_back({k, std::move(detail)}); };

    for (auto i : index.duplicate_files()) report(Violation::Kind::duplicate_id, "file " + dag.files[i].id);
    for (auto i : index.duplicate_tasks()) report(Violation::Kind::duplicate_id, "task " + dag.tasks[i].id);
    for (std::size_t i = 0; i < dag.templates.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (dag.templates[i].name == dag.templates[j].name) {
                report(Violation::Kind::duplicate_id, "template " + dag.templates[i].name);
                break;
            }
        }
    }
    for (const auto& f : dag.files) {
        if (!(f.size_gb >= 0.0)) report(Violation::Kind::negative_size, "file " + f.id);
    }

    for (std::size_t t = 0; t < dag.tasks.size(); ++t) {
        const auto& task = dag.tasks[t];
        if (!dag.templates.empty() && dag.find_template(task.template_name) == nullptr) {
            report(Violation::Kind::unknown_template, "task " + task.id + " uses " + task.template_name);
        }
        for (std::size_t k = 0; k < task.inputs.size(); ++k) {
            if (index.inputs(t)[k] == DagIndex::npos) {
                report(Violation::Kind::dangling_reference, "task " + task.id + " input " + task.inputs[k]);
            }
        }
        for (std::size_t k = 0; k < task.outputs.size(); ++k) {
            if (index.outputs(t)[k] == DagIndex::npos) {
                report(Violation::Kind::dangling_reference, "task " + task.id + " output " + task.outputs[k]);
            }
        }
    }
    for (std::size_t i = 0; i < dag.files.size(); ++i) {
        const auto& f = dag.files[i];
        const std::size_t n = index.producer_count(i);
        if (n > 1) {
            report(Violation::Kind::multiple_producers, "file " + f.id);
        } else if (n == 1 && f.producer != dag.tasks[index.producer_of(i)].id) {
            report(Violation::Kind::producer_mismatch, "file " + f.id + " is produced by " + dag.tasks[index.producer_of(i)].id);
        } else if (n == 0 && f.producer) {
            if (!index.task(*f.producer)) {
                report(Violation::Kind::dangling_reference, "file " + f.id + " producer " + *f.producer);
            } else {
                report(Violation::Kind::producer_mismatch, "file " + f.id + " not listed as output of " + *f.producer);
            }
        }
    }

    if (!index.acyclic()) {
        std::vector<bool> ordered(dag.tasks.size(), false);
        for (auto t : index.topological_order()) ordered[t] = true;
        std::string members;
        for (std::size_t t = 0; t < dag.tasks.size(); ++t) {
            if (ordered[t]) continue;
            if (!members.empty()) members += ",";
            members += dag.tasks[t].id;
        }
        report(Violation::Kind::cycle, "tasks on or behind a cycle: " + members);
    }
    return out;
}

inline std::vector<Violation> validate(const WorkflowDag& dag) { return validate(dag, DagIndex(dag)); }

inline void require_valid(const WorkflowDag& dag, const DagIndex& index) {
    auto v = validate(dag, index);
    if (!v.empty()) {
        throw InvalidDag(std::string("invalid DAG: ") + to_string(v.front().kind) + " (" + v.front().detail + ")");
    }
}

inline void require_valid(const WorkflowDag& dag) { require_valid(dag, DagIndex(dag)); }

/// Length of the longest dependency chain, summing `duration_of` per task.
inline double critical_path_hours(const WorkflowDag& dag,
                                  const std::function<double(const TaskInstance&)>& duration_of) {
    DagIndex index(dag);
    require_valid(dag, index);
    std::vector<double> finish(dag.tasks.size(), 0.0);
    double longest = 0.0;
    for (auto t : index.topological_order()) {
        double start = 0.0;
        for (auto p : index.predecessors(t)) start = std::max(start, finish[p]);
        finish[t] = start + duration_of(dag.tasks[t]);
        longest = std::max(longest, finish[t]);
    }
    return longest;
}

/// Canonical content key of an invocation: template name, ordered input ids
/// and ordered params. Fields are length-prefixed so distinct field tuples can
/// never produce the same key.
inline std::string signature(const TaskInstance& task) {
    std::string key;
    auto put = [&key](char tag, const std::string& s) {
        key += tag;
        key += std::to_string(s.size());
        key += ':';
        key += s;
    };
    put('T', task.template_name);
    for (const auto& in : task.inputs) put('I', in);
    for (const auto& [k, v] : task.params) {
        put('K', k);
        put('V', v);
    }
    return key;
}

} // namespace wesim
