#include <gtest/gtest.h>

#include <map>

#include "wesim/wes_generator.hpp"

using namespace wesim;

namespace {

WesParams params(int t, int c, int r, DistributionMode m = DistributionMode::physical_split) {
    WesParams p;
    p.n_tumor = t;
    p.n_control = c;
    p.n_regions = r;
    p.distribution_mode = m;
    return p;
}

double mutect_input_gb(const WorkflowDag& d) {
    std::map<std::string, double> size;
    for (const auto& f : d.files) size[f.id] = f.size_gb;
    double total = 0.0;
    for (const auto& t : d.tasks) {
        if (t.template_name != templates::mutect) continue;
        for (const auto& in : t.inputs) total += size.at(in);
    }
    return total;
}

} // namespace

TEST(Generator, ReferenceWorkflowCounts) {
    const auto d = generate_wes(params(27, 2, 467));
    EXPECT_EQ(count_tasks(d, templates::align), 108u);
    EXPECT_EQ(count_tasks(d, templates::split), 108u);
    EXPECT_EQ(count_tasks(d, templates::mutect), 25218u);
    EXPECT_EQ(count_tasks(d, templates::filter), 25218u);
    EXPECT_EQ(count_tasks(d, templates::merge), 54u);
    EXPECT_EQ(count_tasks(d, templates::compress), 54u);
    EXPECT_TRUE(validate(d).empty());
}

TEST(Generator, FineGrainedSplitCounts) {
    const auto d = generate_wes(params(27, 2, 2863));
    EXPECT_EQ(count_tasks(d, templates::mutect), 154602u);
}

TEST(Generator, MinimalWorkflow) {
    const auto d = generate_wes(params(1, 1, 1));
    EXPECT_EQ(count_tasks(d, templates::align), 2u);
    EXPECT_EQ(count_tasks(d, templates::mutect), 1u);
    EXPECT_EQ(d.tasks.size(), 2u + 2u + 1u + 1u + 1u + 1u);
    EXPECT_TRUE(validate(d).empty());
}

TEST(Generator, RejectsBadParameters) {
    EXPECT_THROW(generate_wes(params(27, 2, 0)), InvalidArgument);
    EXPECT_THROW(generate_wes(params(0, 2, 10)), InvalidArgument);
    EXPECT_THROW(generate_wes(params(1, 0, 10)), InvalidArgument);
    auto p = params(1, 1, 1);
    p.input_fastq_gb = 0.0;
    EXPECT_THROW(generate_wes(p), InvalidArgument);
}

TEST(Generator, AlignmentsCollapseToOnePerSample) {
    const auto d = generate_wes(params(27, 2, 467));
    EXPECT_EQ(distinct_alignment_signatures(d), 29u);
    EXPECT_EQ(distinct_alignment_signatures(generate_wes(params(3, 4, 5))), 7u);
}

TEST(Generator, UnfusedChainDedupsPerSample) {
    auto p = params(27, 2, 10);
    p.fused_alignment = false;
    const auto d = generate_wes(p);
    EXPECT_EQ(count_tasks(d, templates::trim), 108u);
    EXPECT_EQ(count_tasks(d, templates::bwa), 108u);
    EXPECT_EQ(count_tasks(d, templates::sort_index), 108u);
    EXPECT_EQ(count_tasks(d, templates::align), 0u);
    EXPECT_TRUE(validate(d).empty());
    std::set<std::string> trims;
    for (const auto& t : d.tasks) {
        if (t.template_name == templates::trim) trims.insert(signature(t));
    }
    EXPECT_EQ(trims.size(), 29u);
}

TEST(Generator, BroadcastHasNoSplitAndShipsWholeAlignments) {
    const auto split = generate_wes(params(2, 1, 8));
    const auto bcast = generate_wes(params(2, 1, 8, DistributionMode::broadcast));
    EXPECT_EQ(count_tasks(bcast, templates::split), 0u);
    EXPECT_EQ(count_tasks(bcast, templates::mutect), 16u);
    EXPECT_TRUE(validate(bcast).empty());
    EXPECT_GT(mutect_input_gb(bcast), mutect_input_gb(split));
}

TEST(Generator, BroadcastEqualsSplitBytesForOneRegion) {
    const auto split = generate_wes(params(2, 1, 1));
    const auto bcast = generate_wes(params(2, 1, 1, DistributionMode::broadcast));
    EXPECT_NEAR(mutect_input_gb(bcast), mutect_input_gb(split), 1e-9);
}

TEST(Generator, RegionFilesPartitionTheAlignment) {
    const auto d = generate_wes(params(1, 1, 7));
    std::map<std::string, double> size;
    for (const auto& f : d.files) size[f.id] = f.size_gb;
    const double aligned = size.at("aln/T1-C1/tumor.bam");
    double regions = 0.0;
    for (const auto& f : d.files) {
        if (f.id.rfind("region/T1-C1/tumor/", 0) == 0) regions += f.size_gb;
    }
    EXPECT_NEAR(regions, aligned, 1e-9);
    EXPECT_GT(aligned, 0.0);
}

TEST(Generator, IsDeterministic) { EXPECT_EQ(generate_wes(params(3, 2, 11)), generate_wes(params(3, 2, 11))); }

TEST(Generator, StableIds) {
    const auto d = generate_wes(params(27, 2, 467));
    EXPECT_EQ(d.files[0].id, "ref/genome.idx");
    EXPECT_EQ(d.files[2].id, "fastq/T01.fq");
    EXPECT_EQ(d.tasks[0].id, "align/T01-C1/tumor");
    EXPECT_EQ(d.tasks[1].id, "align/T01-C1/control");
    bool found = false;
    for (const auto& t : d.tasks) found = found || t.id == "mutect/T27-C2/r467";
    EXPECT_TRUE(found);
}
