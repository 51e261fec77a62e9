#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wesim/error.hpp"
#include "wesim/workflow.hpp"

namespace wesim {

/// Template names used by the exome workflow.
namespace templates {
inline constexpr const char* align = "align_pipeline";
inline constexpr const char* split = "split_regions";
inline constexpr const char* mutect = "mutect";
inline constexpr const char* filter = "filter_somatic";
inline constexpr const char* merge = "merge_vcf";
inline constexpr const char* compress = "compress_vcf";
} // namespace templates

/// Per-infrastructure knobs that belong to the task profiles rather than to
/// the hardware description.
struct ClusterTuning {
    /// Relative per-thread compute speed (1 = reference node).
    double speed = 1.0;
    /// Default thread allotment per configurable template. Templates without
    /// an entry get a memory-derived fair share of the node.
    std::map<std::string, int> thread_defaults;

    friend bool operator==(const ClusterTuning&, const ClusterTuning&) = default;
};

struct ProfileSet {
    std::map<std::string, TaskTemplate> templates;
    double fastq_gb = 8.0;
    double reference_genome_gb = 5.0;
    double dictionary_gb = 2.6;
    std::map<std::string, ClusterTuning> clusters;

    const TaskTemplate& at(const std::string& name) const {
        auto it = templates.find(name);
        if (it == templates.end()) throw InvalidArgument("profile set has no template '" + name + "'");
        return it->second;
    }
    TaskTemplate& at(const std::string& name) {
        auto it = templates.find(name);
        if (it == templates.end()) throw InvalidArgument("profile set has no template '" + name + "'");
        return it->second;
    }

    ClusterTuning tuning(const std::string& cluster) const {
        auto it = clusters.find(cluster);
        return it == clusters.end() ? ClusterTuning{} : it->second;
    }

    /// Size of one sample's alignment as produced by the alignment stage.
    double alignment_gb() const { return at(templates::align).output_size(fastq_gb + reference_genome_gb); }

    std::vector<TaskTemplate> template_list() const {
        std::vector<TaskTemplate> out;
        for (const auto& [_, t] : templates) out.push_back(t);
        return out;
    }

    friend bool operator==(const ProfileSet&, const ProfileSet&) = default;
};

/// Range checks for the tool profiles (alignment 8-14 GB, variant caller
/// 3-10 GB, dictionary 2.6 GB). Returns human-readable problems.
inline std::vector<std::string> check_profile_ranges(const ProfileSet& p) {
    std::vector<std::string> problems;
    auto mem_in = [&](const char* name, double lo, double hi) {
        auto it = p.templates.find(name);
        if (it == p.templates.end()) {
            problems.push_back(std::string("missing template ") + name);
            return;
        }
        double m = it->second.memory.required_gb(0.0);
        if (m < lo || m > hi) problems.push_back(std::string(name) + " memory outside range");
    };
    mem_in(templates::align, 8.0, 14.0);
    mem_in(templates::mutect, 3.0, 10.0);
    if (p.dictionary_gb != 2.6) problems.push_back("dictionary size must be 2.6 GB");
    for (const auto& [name, t] : p.templates) {
        if (t.threads.n < 1) problems.push_back(name + ": thread count < 1");
        if (t.memory.base_gb < 0 || t.memory.per_input_gb < 0) problems.push_back(name + ": negative memory");
        if (t.work.serial_s < 0 || t.work.parallel_s_per_gb < 0) problems.push_back(name + ": negative work");
        if (t.output_size.base_gb < 0 || t.output_size.ratio < 0) problems.push_back(name + ": negative output size");
    }
    if (p.fastq_gb <= 0) problems.push_back("fastq size must be positive");
    for (const auto& [name, c] : p.clusters) {
        if (c.speed <= 0) problems.push_back(name + ": non-positive speed");
    }
    return problems;
}

} // namespace wesim
