#pragma once

// JSON forms of the public data types.
//
// DAG document:
//   {"templates": [Template...], "files": [File...], "tasks": [Task...]}
//   Template = {"name", "threads": {"kind": "fixed"|"configurable", "n"},
//               "memory": {"kind": "fixed"|"base_plus_per_input", "base_gb", "per_input_gb"},
//               "work": {"serial_s", "parallel_s_per_gb"}, "deterministic",
//               "output_size": {"base_gb", "ratio"}}
//   File     = {"id", "size_gb", "producer": string|null}
//   Task     = {"id", "template", "inputs": [id...], "params": [[key, value]...], "outputs": [id...]}
// Params are stored as pairs so their order survives a round trip.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "wesim/cost.hpp"
#include "wesim/error.hpp"
#include "wesim/infra.hpp"
#include "wesim/profiles.hpp"
#include "wesim/sched.hpp"
#include "wesim/sim.hpp"
#include "wesim/wes_generator.hpp"
#include "wesim/workflow.hpp"

namespace wesim {

using json = nlohmann::json;

/// Malformed or inconsistent JSON input.
struct FormatError : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

namespace detail {

template <class T>
std::optional<T> optional_field(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    j[key] = v ? json(*v) : json(nullptr);
}

} // namespace detail

// --- templates ---------------------------------------------------------------

inline void to_json(json& j, const ThreadModel& m) {
    j = {{"kind", m.is_configurable() ? "configurable" : "fixed"}, {"n", m.n}};
}
inline void from_json(const json& j, ThreadModel& m) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "fixed" && kind != "configurable") throw FormatError("unknown thread model '" + kind + "'");
    m.kind = kind == "fixed" ? ThreadModel::Kind::fixed : ThreadModel::Kind::configurable;
    m.n = j.at("n").get<int>();
}

inline void to_json(json& j, const MemoryModel& m) {
    j = {{"kind", m.kind == MemoryModel::Kind::fixed ? "fixed" : "base_plus_per_input"},
         {"base_gb", m.base_gb},
         {"per_input_gb", m.per_input_gb}};
}
inline void from_json(const json& j, MemoryModel& m) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "fixed" && kind != "base_plus_per_input") throw FormatError("unknown memory model '" + kind + "'");
    m.kind = kind == "fixed" ? MemoryModel::Kind::fixed : MemoryModel::Kind::base_plus_per_input;
    m.base_gb = j.at("base_gb").get<double>();
    m.per_input_gb = j.value("per_input_gb", 0.0);
}

inline void to_json(json& j, const TaskTemplate& t) {
    j = {{"name", t.name},
         {"threads", t.threads},
         {"memory", t.memory},
         {"work", {{"serial_s", t.work.serial_s}, {"parallel_s_per_gb", t.work.parallel_s_per_gb}}},
         {"deterministic", t.deterministic},
         {"output_size", {{"base_gb", t.output_size.base_gb}, {"ratio", t.output_size.ratio}}}};
}
inline void from_json(const json& j, TaskTemplate& t) {
    t.name = j.at("name").get<std::string>();
    t.threads = j.at("threads").get<ThreadModel>();
    t.memory = j.at("memory").get<MemoryModel>();
    t.work.serial_s = j.at("work").at("serial_s").get<double>();
    t.work.parallel_s_per_gb = j.at("work").at("parallel_s_per_gb").get<double>();
    t.deterministic = j.value("deterministic", true);
    t.output_size.base_gb = j.at("output_size").at("base_gb").get<double>();
    t.output_size.ratio = j.at("output_size").at("ratio").get<double>();
}

// --- DAG ---------------------------------------------------------------------

inline void to_json(json& j, const FileArtifact& f) {
    j = {{"id", f.id}, {"size_gb", f.size_gb}};
    detail::put_optional(j, "producer", f.producer);
}
inline void from_json(const json& j, FileArtifact& f) {
    f.id = j.at("id").get<std::string>();
    f.size_gb = j.at("size_gb").get<double>();
    f.producer = detail::optional_field<std::string>(j, "producer");
}

inline void to_json(json& j, const TaskInstance& t) {
    json params = json::array();
    for (const auto& [k, v] : t.params) params.push_back({k, v});
    j = {{"id", t.id}, {"template", t.template_name}, {"inputs", t.inputs}, {"params", params}, {"outputs", t.outputs}};
}
inline void from_json(const json& j, TaskInstance& t) {
    t.id = j.at("id").get<std::string>();
    t.template_name = j.at("template").get<std::string>();
    t.inputs = j.at("inputs").get<std::vector<std::string>>();
    t.params.clear();
    for (const auto& p : j.value("params", json::array())) {
        if (!p.is_array() || p.size() != 2) throw FormatError("task " + t.id + ": params must be [key, value] pairs");
        t.params.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
    }
    t.outputs = j.at("outputs").get<std::vector<std::string>>();
}

inline void to_json(json& j, const WorkflowDag& d) {
    j = {{"templates", d.templates}, {"files", d.files}, {"tasks", d.tasks}};
}
inline void from_json(const json& j, WorkflowDag& d) {
    d.templates = j.at("templates").get<std::vector<TaskTemplate>>();
    d.files = j.at("files").get<std::vector<FileArtifact>>();
    d.tasks = j.at("tasks").get<std::vector<TaskInstance>>();
}

// --- infrastructure ----------------------------------------------------------

inline FsRegime fs_regime_from_string(const std::string& s) {
    for (auto r : {FsRegime::local_only, FsRegime::shared_posix, FsRegime::staged_dfs}) {
        if (s == to_string(r)) return r;
    }
    throw FormatError("unknown file system regime '" + s + "'");
}

inline void to_json(json& j, const NodeSpec& n) {
    j = {{"id", n.id}, {"threads", n.threads}, {"mem_gb", n.mem_gb}, {"class", n.class_label}};
}
inline void from_json(const json& j, NodeSpec& n) {
    n.id = j.at("id").get<std::string>();
    n.threads = j.at("threads").get<int>();
    n.mem_gb = j.at("mem_gb").get<double>();
    n.class_label = j.value("class", std::string{});
}

inline void to_json(json& j, const ClusterSpec& c) {
    j = {{"name", c.name}, {"nodes", c.nodes}, {"network_gbit", c.network_gbit}, {"fs_regime", to_string(c.fs_regime)}};
    detail::put_optional(j, "acquisition_cost_eur", c.acquisition_cost_eur);
    detail::put_optional(j, "per_run_rental_eur", c.per_run_rental_eur);
}
inline void from_json(const json& j, ClusterSpec& c) {
    c.name = j.at("name").get<std::string>();
    c.nodes = j.at("nodes").get<std::vector<NodeSpec>>();
    c.network_gbit = j.value("network_gbit", 0.0);
    c.fs_regime = fs_regime_from_string(j.at("fs_regime").get<std::string>());
    c.acquisition_cost_eur = detail::optional_field<double>(j, "acquisition_cost_eur");
    c.per_run_rental_eur = detail::optional_field<double>(j, "per_run_rental_eur");
}

// --- profiles ----------------------------------------------------------------

inline void to_json(json& j, const ProfileSet& p) {
    json clusters = json::object();
    for (const auto& [name, c] : p.clusters) {
        json defaults = json::object();
        for (const auto& [t, n] : c.thread_defaults) defaults[t] = n;
        clusters[name] = {{"speed", c.speed}, {"thread_defaults", defaults}};
    }
    j = {{"templates", p.template_list()},
         {"fastq_gb", p.fastq_gb},
         {"reference_genome_gb", p.reference_genome_gb},
         {"dictionary_gb", p.dictionary_gb},
         {"clusters", clusters}};
}
inline void from_json(const json& j, ProfileSet& p) {
    p.templates.clear();
    for (const auto& t : j.at("templates").get<std::vector<TaskTemplate>>()) {
        if (!p.templates.emplace(t.name, t).second) throw FormatError("duplicate template '" + t.name + "'");
    }
    p.fastq_gb = j.at("fastq_gb").get<double>();
    p.reference_genome_gb = j.at("reference_genome_gb").get<double>();
    p.dictionary_gb = j.at("dictionary_gb").get<double>();
    p.clusters.clear();
    const json clusters = j.value("clusters", json::object());
    for (const auto& [name, c] : clusters.items()) {
        ClusterTuning t;
        t.speed = c.value("speed", 1.0);
        t.thread_defaults = c.value("thread_defaults", std::map<std::string, int>{});
        p.clusters[name] = t;
    }
}

// --- scheduling and simulation ----------------------------------------------

inline void to_json(json& j, const Policy& p) {
    j = {{"kind", to_string(p.kind)}, {"max_concurrency", p.max_concurrency}};
    detail::put_optional(j, "alignment_node_cap", p.alignment_node_cap);
}
inline void from_json(const json& j, Policy& p) {
    p.kind = policy_kind_from_string(j.at("kind").get<std::string>());
    p.max_concurrency = j.value("max_concurrency", 0);
    p.alignment_node_cap = detail::optional_field<int>(j, "alignment_node_cap");
    p.check();
}

inline void to_json(json& j, const SimOptions& o) {
    j = {{"cache_enabled", o.cache_enabled},
         {"oversubscription",
          {{"kind", o.oversubscription.kind == Oversubscription::Kind::forbid ? "forbid" : "penalize"},
           {"mem_spill_factor", o.oversubscription.mem_spill_factor},
           {"thread_share", o.oversubscription.thread_share}}},
         {"random_seed", o.random_seed},
         {"local_copy_s_per_gb", o.local_copy_s_per_gb}};
}
inline void from_json(const json& j, SimOptions& o) {
    o.cache_enabled = j.value("cache_enabled", false);
    if (j.contains("oversubscription")) {
        const auto& ov = j.at("oversubscription");
        const auto kind = ov.value("kind", std::string("forbid"));
        if (kind != "forbid" && kind != "penalize") throw FormatError("unknown oversubscription '" + kind + "'");
        o.oversubscription.kind = kind == "forbid" ? Oversubscription::Kind::forbid : Oversubscription::Kind::penalize;
        o.oversubscription.mem_spill_factor = ov.value("mem_spill_factor", 10.0);
        o.oversubscription.thread_share = ov.value("thread_share", true);
    }
    o.random_seed = j.value("random_seed", std::uint64_t{0});
    o.local_copy_s_per_gb = j.value("local_copy_s_per_gb", 0.0);
    o.check();
}

inline void to_json(json& j, const TemplateTotals& t) {
    j = {{"count", t.count}, {"cpu_hours", t.cpu_hours}, {"gb_moved", t.gb_moved}, {"cache_hits", t.cache_hits}};
}
inline void from_json(const json& j, TemplateTotals& t) {
    t.count = j.at("count").get<std::size_t>();
    t.cpu_hours = j.at("cpu_hours").get<double>();
    t.gb_moved = j.at("gb_moved").get<double>();
    t.cache_hits = j.at("cache_hits").get<std::size_t>();
}

inline void to_json(json& j, const RunReport& r) {
    json util = json::array();
    for (const auto& [node, u] : r.node_utilization) util.push_back({{"node", node}, {"utilization", u}});
    j = {{"cluster", r.cluster},
         {"policy", r.policy},
         {"cache_enabled", r.cache_enabled},
         {"makespan_h", r.makespan_h},
         {"task_count", r.task_count},
         {"per_template", r.per_template},
         {"node_utilization", util},
         {"cache_hits", r.cache_hits},
         {"total_network_gb", r.total_network_gb},
         {"node_count", r.node_count}};
    detail::put_optional(j, "alignment_node_cap", r.alignment_node_cap);
    detail::put_optional(j, "acquisition_cost_eur", r.acquisition_cost_eur);
    detail::put_optional(j, "per_run_rental_eur", r.per_run_rental_eur);
}
inline void from_json(const json& j, RunReport& r) {
    r.cluster = j.at("cluster").get<std::string>();
    r.policy = j.value("policy", std::string{});
    r.cache_enabled = j.value("cache_enabled", false);
    r.makespan_h = j.at("makespan_h").get<double>();
    r.task_count = j.value("task_count", std::size_t{0});
    r.per_template = j.value("per_template", std::map<std::string, TemplateTotals>{});
    r.node_utilization.clear();
    for (const auto& u : j.value("node_utilization", json::array())) {
        r.node_utilization.emplace_back(u.at("node").get<std::string>(), u.at("utilization").get<double>());
    }
    r.cache_hits = j.value("cache_hits", std::size_t{0});
    r.total_network_gb = j.value("total_network_gb", 0.0);
    r.node_count = j.value("node_count", std::size_t{0});
    r.alignment_node_cap = detail::optional_field<int>(j, "alignment_node_cap");
    r.acquisition_cost_eur = detail::optional_field<double>(j, "acquisition_cost_eur");
    r.per_run_rental_eur = detail::optional_field<double>(j, "per_run_rental_eur");
}

// --- workflow parameters -----------------------------------------------------

inline DistributionMode distribution_mode_from_string(const std::string& s) {
    if (s == "broadcast") return DistributionMode::broadcast;
    if (s == "split" || s == "physical_split") return DistributionMode::physical_split;
    throw FormatError("unknown distribution mode '" + s + "'");
}

/// Profiles are carried separately (see `--profiles`).
inline void to_json(json& j, const WesParams& p) {
    j = {{"n_tumor", p.n_tumor},
         {"n_control", p.n_control},
         {"n_regions", p.n_regions},
         {"distribution_mode", to_string(p.distribution_mode)},
         {"fused_alignment", p.fused_alignment}};
    detail::put_optional(j, "input_fastq_gb", p.input_fastq_gb);
}
inline void from_json(const json& j, WesParams& p) {
    p.n_tumor = j.value("n_tumor", p.n_tumor);
    p.n_control = j.value("n_control", p.n_control);
    p.n_regions = j.value("n_regions", p.n_regions);
    if (j.contains("distribution_mode")) {
        p.distribution_mode = distribution_mode_from_string(j.at("distribution_mode").get<std::string>());
    }
    p.fused_alignment = j.value("fused_alignment", p.fused_alignment);
    if (auto v = detail::optional_field<double>(j, "input_fastq_gb")) p.input_fastq_gb = v;
}

// --- files -------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

/// Parses `j` as T, reporting schema problems as FormatError.
template <class T>
T parse_as(const json& j, const std::string& what) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw FormatError(what + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("failed writing " + path);
}

} // namespace wesim
