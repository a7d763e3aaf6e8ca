#include "fixtures.hpp"

#include "ompforge/greenlist.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ompforge;

namespace {

TestOutcome outcome(const std::string& name, PhaseResult result, const std::string& tc = "llvm",
                    const std::string& tgt = "mi210", const std::string& suite = "ompvv") {
    TestOutcome o;
    o.test.suite_id = suite;
    o.test.rel_path = "5.0/" + name + ".c";
    o.test.spec_version = SpecVersion::v50;
    o.test.language = Language::C;
    o.test.name = name;
    o.toolchain_id = tc;
    o.target_id = tgt;
    o.phase_result = result;
    return o;
}

std::vector<TestOutcome> sized_run(int total, int passing) {
    std::vector<TestOutcome> outcomes;
    for (int i = 0; i < total; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "t%03d", i);
        outcomes.push_back(outcome(name, i < passing ? PhaseResult::pass : PhaseResult::wrong_answer));
    }
    return outcomes;
}

TEST(BuildLists, PartitionCountsMatch) {
    GreenRedList list = build_lists(sized_run(742, 409), "pin-1", 1000);
    EXPECT_EQ(list.green.size(), 409u);
    EXPECT_EQ(list.red.size(), 333u);
    EXPECT_EQ(list.baseline_pin, "pin-1");
    // partition law
    std::set<std::string> both;
    std::set_intersection(list.green.begin(), list.green.end(), list.red.begin(), list.red.end(),
                          std::inserter(both, both.begin()));
    EXPECT_TRUE(both.empty());
}

TEST(BuildLists, AllPassMeansEmptyRed) {
    GreenRedList list = build_lists(sized_run(10, 10), "pin", 0);
    EXPECT_EQ(list.green.size(), 10u);
    EXPECT_TRUE(list.red.empty());
}

TEST(BuildLists, DuplicateTestNameRejected) {
    auto outcomes = sized_run(3, 3);
    outcomes.push_back(outcome("t001", PhaseResult::compile_fail));
    EXPECT_THROW(build_lists(outcomes, "pin", 0), DuplicateTest);
}

TEST(BuildLists, MixedScopeRejected) {
    auto outcomes = sized_run(3, 3);
    outcomes.push_back(outcome("x", PhaseResult::pass, "gnu"));
    EXPECT_THROW(build_lists(outcomes, "pin", 0), MixedScope);
    EXPECT_THROW(build_lists({}, "pin", 0), EmptyInput);
}

TEST(FilterGreen, KeepsGreenInInputOrder) {
    GreenRedList list;
    list.green = {"a", "c"};
    list.red = {"b"};
    std::vector<TestCase> tests;
    for (const char* n : {"a", "b", "c"}) {
        TestCase t;
        t.name = n;
        tests.push_back(t);
    }
    auto result = filter_green(tests, list);
    ASSERT_EQ(result.kept.size(), 2u);
    EXPECT_EQ(result.kept[0].name, "a");
    EXPECT_EQ(result.kept[1].name, "c");
    EXPECT_TRUE(result.unlisted.empty());
}

TEST(FilterGreen, AllGreenIsIdentity) {
    GreenRedList list;
    list.green = {"a", "b"};
    std::vector<TestCase> tests;
    for (const char* n : {"a", "b"}) {
        TestCase t;
        t.name = n;
        tests.push_back(t);
    }
    EXPECT_EQ(filter_green(tests, list).kept.size(), tests.size());
}

TEST(FilterGreen, NewTestIsExcludedAndReportedUnlisted) {
    // build the list, then add a file to the tree and rediscover
    fixtures::TempDir tmp("unlisted");
    fixtures::write_file(tmp.sub("5.0/test_a.c"), "x");
    fixtures::write_file(tmp.sub("5.0/test_b.c"), "x");
    SuiteSpec suite = fixtures::make_tree_suite(tmp.path(), "s");
    auto before = discover_tests(suite);
    std::vector<TestOutcome> outcomes;
    for (const auto& t : before) {
        TestOutcome o;
        o.test = t;
        o.toolchain_id = "llvm";
        o.target_id = "mi210";
        o.phase_result = PhaseResult::pass;
        outcomes.push_back(o);
    }
    GreenRedList list = build_lists(outcomes, "pin", 0);

    fixtures::write_file(tmp.sub("5.0/test_d.c"), "x");
    auto after = discover_tests(suite);
    ASSERT_EQ(after.size(), before.size() + 1);
    auto result = filter_green(after, list);
    EXPECT_EQ(result.kept.size(), before.size());
    ASSERT_EQ(result.unlisted.size(), 1u);
    EXPECT_EQ(result.unlisted[0], "test_d");
    EXPECT_LE(result.kept.size(), list.green.size());
}

TEST(DiffResults, RegressionDetected) {
    GreenRedList baseline = build_lists(
        {outcome("a", PhaseResult::pass), outcome("b", PhaseResult::pass),
         outcome("c", PhaseResult::pass)},
        "pin", 0);
    RegressionReport report = diff_results(
        baseline, {outcome("a", PhaseResult::pass), outcome("b", PhaseResult::compile_fail),
                   outcome("c", PhaseResult::pass)});
    EXPECT_EQ(report.regressions, std::set<std::string>{"b"});
    EXPECT_TRUE(report.promotions.empty());
    EXPECT_EQ(report.unchanged_green, 2u);
}

TEST(DiffResults, FixedPointOnIdenticalOutcomes) {
    auto outcomes = sized_run(100, 73);
    GreenRedList baseline = build_lists(outcomes, "pin", 0);
    RegressionReport report = diff_results(baseline, outcomes);
    EXPECT_TRUE(report.regressions.empty());
    EXPECT_TRUE(report.promotions.empty());
    EXPECT_EQ(report.unchanged_green, 73u);
    EXPECT_EQ(report.unchanged_red, 27u);
}

TEST(DiffResults, SeededFlipsDetectedExactly) {
    auto outcomes = sized_run(100, 90);
    GreenRedList baseline = build_lists(outcomes, "pin", 0);

    // seed 3 regressions and 2 promotions; the seeding record is the oracle
    std::set<std::string> seeded_regressions{"t010", "t042", "t077"};
    std::set<std::string> seeded_promotions{"t092", "t095"};
    for (auto& o : outcomes) {
        if (seeded_regressions.count(o.test.name)) o.phase_result = PhaseResult::runtime_fail;
        if (seeded_promotions.count(o.test.name)) o.phase_result = PhaseResult::pass;
    }
    RegressionReport report = diff_results(baseline, outcomes);
    EXPECT_EQ(report.regressions, seeded_regressions);
    EXPECT_EQ(report.promotions, seeded_promotions);
    EXPECT_EQ(report.unchanged_green, 87u);
    EXPECT_EQ(report.unchanged_red, 8u);
}

TEST(DiffResults, ScopeMismatchRejected) {
    GreenRedList baseline = build_lists(sized_run(5, 5), "pin", 0);
    std::vector<TestOutcome> foreign{outcome("a", PhaseResult::pass, "gnu")};
    EXPECT_THROW(diff_results(baseline, foreign), ScopeMismatch);
}

TEST(DiffResults, RegressionsAndPromotionsAlwaysDisjoint) {
    std::mt19937 rng(5);
    std::bernoulli_distribution pass_dist(0.6);
    for (int round = 0; round < 200; ++round) {
        std::vector<TestOutcome> base;
        for (int i = 0; i < 40; ++i)
            base.push_back(outcome("t" + std::to_string(i),
                                   pass_dist(rng) ? PhaseResult::pass : PhaseResult::wrong_answer));
        GreenRedList baseline = build_lists(base, "pin", 0);
        std::vector<TestOutcome> fresh;
        for (int i = 0; i < 40; ++i)
            fresh.push_back(outcome("t" + std::to_string(i),
                                    pass_dist(rng) ? PhaseResult::pass : PhaseResult::runtime_fail));
        RegressionReport report = diff_results(baseline, fresh);

        std::set<std::string> overlap;
        std::set_intersection(report.regressions.begin(), report.regressions.end(),
                              report.promotions.begin(), report.promotions.end(),
                              std::inserter(overlap, overlap.begin()));
        ASSERT_TRUE(overlap.empty());
        for (const auto& r : report.regressions) ASSERT_TRUE(baseline.green.count(r));
        for (const auto& p : report.promotions) ASSERT_TRUE(baseline.red.count(p));
    }
}

TEST(GreenRedListJson, RoundTripAndFilename) {
    GreenRedList list = build_lists(sized_run(6, 4), "deadbeef", 1723200000);
    json j = to_json(list);
    GreenRedList back = green_red_list_from_json(j);
    EXPECT_EQ(back, list);
    EXPECT_EQ(green_list_filename(list), "greenlist-llvm-mi210-ompvv.json");
    // arrays serialize sorted
    auto greens = j.at("green").get<std::vector<std::string>>();
    EXPECT_TRUE(std::is_sorted(greens.begin(), greens.end()));
}

} // namespace
