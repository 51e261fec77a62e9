#pragma once

#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "wesim/default_profiles.hpp"
#include "wesim/error.hpp"
#include "wesim/profiles.hpp"
#include "wesim/workflow.hpp"

namespace wesim {

enum class DistributionMode {
    /// The whole alignment is shipped to every variant-calling task.
    broadcast,
    /// Each alignment is cut into per-region files first.
    physical_split,
};

inline const char* to_string(DistributionMode m) {
    return m == DistributionMode::broadcast ? "broadcast" : "physical_split";
}

/// Unfused alignment chain, one task per tool.
namespace templates {
inline constexpr const char* trim = "trimadap";
inline constexpr const char* bwa = "bwa_mem";
inline constexpr const char* mark_duplicates = "samblaster";
inline constexpr const char* sort_index = "samtools_sort";
} // namespace templates

struct WesParams {
    int n_tumor = 27;
    int n_control = 2;
    int n_regions = 467;
    DistributionMode distribution_mode = DistributionMode::physical_split;
    bool fused_alignment = true;
    /// Overrides the profile's read-set size when set.
    std::optional<double> input_fastq_gb;
    ProfileSet profile_set = default_profiles();

    double fastq_gb() const { return input_fastq_gb.value_or(profile_set.fastq_gb); }

    void check() const {
        if (n_tumor < 1 || n_control < 1) throw InvalidArgument("sample counts must be >= 1");
        if (n_regions < 1) throw InvalidArgument("region count must be >= 1");
        if (!(fastq_gb() > 0.0)) throw InvalidArgument("input FASTQ size must be > 0");
    }
};

namespace detail {

inline std::string padded(int value, int max_value) {
    int width = 1;
    for (int v = max_value; v >= 10; v /= 10) ++width;
    std::string digits = std::to_string(value);
    return std::string(width > static_cast<int>(digits.size()) ? width - digits.size() : 0, '0') + digits;
}

class DagBuilder {
public:
    explicit DagBuilder(WorkflowDag& dag) : dag_(dag) {}

    void input(std::string id, double size_gb) { dag_.files.push_back({std::move(id), size_gb, std::nullopt}); }

    /// Adds a task whose outputs share the template's output volume equally.
    void task(const TaskTemplate& tmpl, std::string id, std::vector<std::string> inputs, std::vector<Param> params,
              std::vector<std::string> outputs) {
        double in_gb = 0.0;
        for (const auto& in : inputs) in_gb += size_of(in);
        const double each = outputs.empty() ? 0.0 : tmpl.output_size(in_gb) / static_cast<double>(outputs.size());
        for (const auto& o : outputs) {
            sizes_.emplace(o, each);
            dag_.files.push_back({o, each, id});
        }
        dag_.tasks.push_back({std::move(id), tmpl.name, std::move(inputs), std::move(params), std::move(outputs)});
    }

    double size_of(const std::string& file) {
        auto it = sizes_.find(file);
        if (it != sizes_.end()) return it->second;
        for (const auto& f : dag_.files) {
            if (f.id == file) return sizes_.emplace(file, f.size_gb).first->second;
        }
        throw InvalidArgument("unknown file " + file);
    }

private:
    WorkflowDag& dag_;
    std::unordered_map<std::string, double> sizes_;
};

} // namespace detail

inline bool is_alignment_template(const std::string& name) {
    return name == templates::align || name == templates::bwa;
}

/// Builds the tumor/control exome workflow: alignment per sample of every pair,
/// optional region split, one variant-calling task per pair and region, then
/// per-region filtering, a per-pair merge and a per-pair compression.
inline WorkflowDag generate_wes(const WesParams& params) {
    params.check();
    const ProfileSet& prof = params.profile_set;
    const int R = params.n_regions;
    const bool split = params.distribution_mode == DistributionMode::physical_split;

    WorkflowDag dag;
    std::vector<std::string> used = {templates::mutect, templates::filter, templates::merge, templates::compress};
    if (split) used.push_back(templates::split);
    if (params.fused_alignment) {
        used.push_back(templates::align);
    } else {
        used.insert(used.end(), {templates::trim, templates::bwa, templates::mark_duplicates, templates::sort_index});
    }
    std::sort(used.begin(), used.end());
    for (const auto& name : used) dag.templates.push_back(prof.at(name));

    detail::DagBuilder b(dag);
    b.input("ref/genome.idx", prof.reference_genome_gb);
    b.input("ref/dictionary", prof.dictionary_gb);

    auto tumor = [&](int i) { return "T" + detail::padded(i + 1, params.n_tumor); };
    auto control = [&](int i) { return "C" + detail::padded(i + 1, params.n_control); };
    for (int i = 0; i < params.n_tumor; ++i) b.input("fastq/" + tumor(i) + ".fq", params.fastq_gb());
    for (int i = 0; i < params.n_control; ++i) b.input("fastq/" + control(i) + ".fq", params.fastq_gb());

    struct Pair {
        std::string label;
        std::string tumor_sample, control_sample;
    };
    std::vector<Pair> pairs;
    for (int t = 0; t < params.n_tumor; ++t) {
        for (int c = 0; c < params.n_control; ++c) pairs.push_back({tumor(t) + "-" + control(c), tumor(t), control(c)});
    }
    const char* roles[2] = {"tumor", "control"};

    // Phase 1: one alignment per sample per pair, as in the original workflow.
    auto alignment_file = [](const Pair& p, const char* role) { return "aln/" + p.label + "/" + role + ".bam"; };
    for (const auto& p : pairs) {
        for (const char* role : roles) {
            const std::string& sample = role[0] == 't' ? p.tumor_sample : p.control_sample;
            const std::string fq = "fastq/" + sample + ".fq";
            const std::string tag = p.label + "/" + role;
            if (params.fused_alignment) {
                b.task(prof.at(templates::align), "align/" + tag, {fq, "ref/genome.idx"}, {{"sample", sample}},
                       {alignment_file(p, role)});
            } else {
                b.task(prof.at(templates::trim), "trim/" + tag, {fq}, {{"sample", sample}}, {"trim/" + tag + ".fq"});
                b.task(prof.at(templates::bwa), "bwa/" + tag, {"trim/" + tag + ".fq", "ref/genome.idx"},
                       {{"sample", sample}}, {"sam/" + tag + ".sam"});
                b.task(prof.at(templates::mark_duplicates), "markdup/" + tag, {"sam/" + tag + ".sam"},
                       {{"sample", sample}}, {"markdup/" + tag + ".sam"});
                b.task(prof.at(templates::sort_index), "sort/" + tag, {"markdup/" + tag + ".sam"},
                       {{"sample", sample}}, {alignment_file(p, role)});
            }
        }
    }

    auto region_label = [&](int r) { return "r" + detail::padded(r + 1, R); };
    auto region_file = [&](const Pair& p, const char* role, int r) {
        return "region/" + p.label + "/" + role + "/" + region_label(r) + ".bam";
    };
    if (split) {
        for (const auto& p : pairs) {
            for (const char* role : roles) {
                std::vector<std::string> outs;
                outs.reserve(R);
                for (int r = 0; r < R; ++r) outs.push_back(region_file(p, role, r));
                b.task(prof.at(templates::split), "split/" + p.label + "/" + role, {alignment_file(p, role)},
                       {{"regions", std::to_string(R)}}, std::move(outs));
            }
        }
    }

    // Phases 2 and 3, pair by pair.
    for (const auto& p : pairs) {
        std::vector<std::string> filtered;
        filtered.reserve(R);
        for (int r = 0; r < R; ++r) {
            const std::string reg = region_label(r);
            std::vector<std::string> in = split ? std::vector<std::string>{region_file(p, "tumor", r),
                                                                          region_file(p, "control", r), "ref/dictionary"}
                                                : std::vector<std::string>{alignment_file(p, "tumor"),
                                                                          alignment_file(p, "control"), "ref/dictionary"};
            b.task(prof.at(templates::mutect), "mutect/" + p.label + "/" + reg, std::move(in),
                   {{"pair", p.label}, {"region", reg}}, {"calls/" + p.label + "/" + reg + ".vcf"});
        }
        for (int r = 0; r < R; ++r) {
            const std::string reg = region_label(r);
            b.task(prof.at(templates::filter), "filter/" + p.label + "/" + reg, {"calls/" + p.label + "/" + reg + ".vcf"},
                   {{"pair", p.label}, {"region", reg}}, {"somatic/" + p.label + "/" + reg + ".vcf"});
            filtered.push_back("somatic/" + p.label + "/" + reg + ".vcf");
        }
        b.task(prof.at(templates::merge), "merge/" + p.label, std::move(filtered), {{"pair", p.label}},
               {"merged/" + p.label + ".vcf"});
        b.task(prof.at(templates::compress), "compress/" + p.label, {"merged/" + p.label + ".vcf"},
               {{"pair", p.label}}, {"final/" + p.label + ".vcf.gz"});
    }
    return dag;
}

/// Number of distinct invocation signatures among alignment-stage tasks.
inline std::size_t distinct_alignment_signatures(const WorkflowDag& dag) {
    std::set<std::string> keys;
    for (const auto& t : dag.tasks) {
        if (is_alignment_template(t.template_name)) keys.insert(signature(t));
    }
    return keys.size();
}

inline std::size_t count_tasks(const WorkflowDag& dag, const std::string& template_name) {
    std::size_t n = 0;
    for (const auto& t : dag.tasks) n += t.template_name == template_name;
    return n;
}

} // namespace wesim
