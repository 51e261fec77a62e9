#include <gtest/gtest.h>

#include "wesim/workflow.hpp"

using namespace wesim;

namespace {

TaskTemplate tmpl(const std::string& name) {
    return {name, ThreadModel::fixed(1), MemoryModel::fixed(1.0), WorkModel{10.0, 0.0}, true, {}};
}

/// in -> a -> x -> b -> y
WorkflowDag chain() {
    WorkflowDag d;
    d.templates = {tmpl("t")};
    d.files = {{"in", 1.0, std::nullopt}, {"x", 1.0, "a"}, {"y", 1.0, "b"}};
    d.tasks = {{"a", "t", {"in"}, {}, {"x"}}, {"b", "t", {"x"}, {}, {"y"}}};
    return d;
}

bool has(const std::vector<Violation>& v, Violation::Kind k) {
    for (const auto& x : v) {
        if (x.kind == k) return true;
    }
    return false;
}

} // namespace

TEST(Validate, WellFormedChainHasNoViolations) {
    EXPECT_TRUE(validate(chain()).empty());
    EXPECT_NO_THROW(require_valid(chain()));
}

TEST(Validate, EmptyDagIsValid) { EXPECT_TRUE(validate(WorkflowDag{}).empty()); }

TEST(Validate, DetectsCycle) {
    WorkflowDag d;
    d.templates = {tmpl("t")};
    d.files = {{"x", 1.0, "a"}, {"y", 1.0, "b"}};
    d.tasks = {{"a", "t", {"y"}, {}, {"x"}}, {"b", "t", {"x"}, {}, {"y"}}};
    auto v = validate(d);
    EXPECT_TRUE(has(v, Violation::Kind::cycle));
    EXPECT_THROW(require_valid(d), InvalidDag);
}

TEST(Validate, DetectsDanglingInput) {
    auto d = chain();
    d.tasks[1].inputs.push_back("missing");
    EXPECT_TRUE(has(validate(d), Violation::Kind::dangling_reference));
}

TEST(Validate, DetectsDuplicateIds) {
    auto d = chain();
    d.files.push_back({"in", 2.0, std::nullopt});
    EXPECT_TRUE(has(validate(d), Violation::Kind::duplicate_id));
    auto e = chain();
    e.tasks.push_back({"a", "t", {}, {}, {}});
    EXPECT_TRUE(has(validate(e), Violation::Kind::duplicate_id));
}

TEST(Validate, DetectsMultipleProducers) {
    auto d = chain();
    d.tasks[1].outputs.push_back("x");
    EXPECT_TRUE(has(validate(d), Violation::Kind::multiple_producers));
}

TEST(Validate, DetectsProducerMismatch) {
    auto d = chain();
    d.files[1].producer = "b";
    EXPECT_TRUE(has(validate(d), Violation::Kind::producer_mismatch));
    auto e = chain();
    e.files[0].producer = "a";  // claims a producer that does not list it
    EXPECT_TRUE(has(validate(e), Violation::Kind::producer_mismatch));
}

TEST(Validate, DetectsNegativeSizeAndUnknownTemplate) {
    auto d = chain();
    d.files[0].size_gb = -1.0;
    d.tasks[0].template_name = "nope";
    auto v = validate(d);
    EXPECT_TRUE(has(v, Violation::Kind::negative_size));
    EXPECT_TRUE(has(v, Violation::Kind::unknown_template));
}

TEST(DagIndexTest, TopologicalOrderIsCanonical) {
    WorkflowDag d;
    d.templates = {tmpl("t")};
    d.files = {{"x", 1, "c"}, {"y", 1, "a"}};
    // c has no inputs, a has none, b depends on both.
    d.tasks = {{"b", "t", {"x", "y"}, {}, {}}, {"a", "t", {}, {}, {"y"}}, {"c", "t", {}, {}, {"x"}}};
    DagIndex idx(d);
    ASSERT_TRUE(idx.acyclic());
    EXPECT_EQ(idx.topological_order(), (std::vector<std::size_t>{1, 2, 0}));
    EXPECT_EQ(idx.predecessors(0), (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(idx.successors(1), (std::vector<std::size_t>{0}));
}

TEST(Signature, EqualFieldsGiveEqualKeys) {
    TaskInstance a{"a", "t", {"f1", "f2"}, {{"region", "r1"}}, {"o1"}};
    TaskInstance b{"b", "t", {"f1", "f2"}, {{"region", "r1"}}, {"o2"}};
    EXPECT_EQ(signature(a), signature(b));
}

TEST(Signature, DifferentParamsGiveDifferentKeys) {
    TaskInstance a{"a", "t", {"f"}, {{"region", "r1"}}, {}};
    TaskInstance b{"b", "t", {"f"}, {{"region", "r2"}}, {}};
    EXPECT_NE(signature(a), signature(b));
}

TEST(Signature, FieldBoundariesCannotCollide) {
    TaskInstance a{"a", "t", {"ab", "c"}, {}, {}};
    TaskInstance b{"b", "t", {"a", "bc"}, {}, {}};
    EXPECT_NE(signature(a), signature(b));
    TaskInstance c{"c", "t", {"f"}, {{"k", "v"}}, {}};
    TaskInstance e{"e", "t", {"f", "k"}, {{"", "v"}}, {}};
    EXPECT_NE(signature(c), signature(e));
    // Order of inputs matters.
    TaskInstance f{"f", "t", {"c", "ab"}, {}, {}};
    EXPECT_NE(signature(a), signature(f));
}

TEST(CriticalPath, SumsLongestChain) {
    auto d = chain();
    d.tasks.push_back({"c", "t", {"in"}, {}, {}});
    const double h = critical_path_hours(d, [](const TaskInstance& t) { return t.id == "c" ? 1.5 : 1.0; });
    EXPECT_DOUBLE_EQ(h, 2.0);
}

TEST(CriticalPath, RejectsCycles) {
    WorkflowDag d;
    d.files = {{"x", 1.0, "a"}};
    d.tasks = {{"a", "t", {"x"}, {}, {"x"}}};
    EXPECT_THROW(critical_path_hours(d, [](const TaskInstance&) { return 1.0; }), InvalidDag);
}

TEST(Models, ThreadAndMemoryModels) {
    EXPECT_EQ(ThreadModel::fixed(3).min_threads(), 3);
    EXPECT_EQ(ThreadModel::configurable(24).min_threads(), 1);
    EXPECT_EQ(ThreadModel::configurable(24).max_threads(), 24);
    EXPECT_DOUBLE_EQ(MemoryModel::fixed(4).required_gb(100), 4.0);
    EXPECT_DOUBLE_EQ(MemoryModel::base_plus_per_input(1, 0.5).required_gb(4), 3.0);
    EXPECT_DOUBLE_EQ((OutputSizeModel{0.5, 2.0})(3.0), 6.5);
}
