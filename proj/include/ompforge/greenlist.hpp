#pragma once

#include "ompforge/clock.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/suite.hpp"

#include <set>
#include <string>
#include <vector>

namespace ompforge {

// Expected-outcome partition of one suite under one compiler×target: the
// names that passed at baseline time (green) and everything else (red).
// Routine pipelines run only the green side.
struct GreenRedList {
    std::string toolchain_id;
    std::string target_id;
    std::string suite_id;
    std::string baseline_pin;
    std::set<std::string> green;
    std::set<std::string> red;
    Timestamp created_at = 0;

    bool operator==(const GreenRedList&) const = default;
};

struct RegressionReport {
    std::string toolchain_id;
    std::string target_id;
    std::string suite_id;
    std::set<std::string> regressions; // were green, no longer pass
    std::set<std::string> promotions;  // were red, now pass
    std::size_t unchanged_green = 0;
    std::size_t unchanged_red = 0;

    bool operator==(const RegressionReport&) const = default;
};

namespace detail {

inline void check_uniform_scope(const std::vector<TestOutcome>& outcomes) {
    for (const TestOutcome& o : outcomes) {
        const TestOutcome& first = outcomes.front();
        if (o.toolchain_id != first.toolchain_id || o.target_id != first.target_id ||
            o.test.suite_id != first.test.suite_id)
            throw MixedScope("outcomes span multiple (toolchain, target, suite) scopes: (" +
                             first.toolchain_id + ", " + first.target_id + ", " +
                             first.test.suite_id + ") vs (" + o.toolchain_id + ", " + o.target_id +
                             ", " + o.test.suite_id + ")");
    }
}

} // namespace detail

// Partition a full run into green (pass) and red (everything else).
inline GreenRedList build_lists(const std::vector<TestOutcome>& outcomes, const std::string& pin,
                                Timestamp created_at) {
    if (outcomes.empty()) throw EmptyInput("build_lists: no outcomes to partition");
    detail::check_uniform_scope(outcomes);
    GreenRedList list;
    list.toolchain_id = outcomes.front().toolchain_id;
    list.target_id = outcomes.front().target_id;
    list.suite_id = outcomes.front().test.suite_id;
    list.baseline_pin = pin;
    list.created_at = created_at;
    for (const TestOutcome& o : outcomes) {
        bool fresh = o.phase_result == PhaseResult::pass ? list.green.insert(o.test.name).second
                                                         : list.red.insert(o.test.name).second;
        if (!fresh || (list.green.count(o.test.name) && list.red.count(o.test.name)))
            throw DuplicateTest("test '" + o.test.name + "' appears more than once");
    }
    return list;
}

struct GreenFilterResult {
    std::vector<TestCase> kept;          // input order preserved
    std::vector<std::string> unlisted;   // discovered since the list was built
};

// Keep only tests on the green list. Tests on neither list (added to the
// suite after the baseline) are excluded from execution but surfaced so an
// operator can regenerate the list.
inline GreenFilterResult filter_green(const std::vector<TestCase>& tests, const GreenRedList& list) {
    if (!tests.empty() && tests.front().suite_id != list.suite_id)
        throw ScopeMismatch("green list is for suite '" + list.suite_id + "', tests are from '" +
                            tests.front().suite_id + "'");
    GreenFilterResult result;
    for (const TestCase& t : tests) {
        if (list.green.count(t.name))
            result.kept.push_back(t);
        else if (!list.red.count(t.name))
            result.unlisted.push_back(t.name);
    }
    return result;
}

// Diff a new run against the baseline partition. Tests missing from
// new_outcomes are counted neither as regressions nor promotions.
inline RegressionReport diff_results(const GreenRedList& baseline,
                                     const std::vector<TestOutcome>& new_outcomes) {
    if (!new_outcomes.empty()) {
        detail::check_uniform_scope(new_outcomes);
        const TestOutcome& first = new_outcomes.front();
        if (first.toolchain_id != baseline.toolchain_id || first.target_id != baseline.target_id ||
            first.test.suite_id != baseline.suite_id)
            throw ScopeMismatch("baseline scope (" + baseline.toolchain_id + ", " +
                                baseline.target_id + ", " + baseline.suite_id +
                                ") does not match outcomes scope (" + first.toolchain_id + ", " +
                                first.target_id + ", " + first.test.suite_id + ")");
    }
    RegressionReport report;
    report.toolchain_id = baseline.toolchain_id;
    report.target_id = baseline.target_id;
    report.suite_id = baseline.suite_id;
    for (const TestOutcome& o : new_outcomes) {
        bool passed = o.phase_result == PhaseResult::pass;
        if (baseline.green.count(o.test.name)) {
            if (passed)
                ++report.unchanged_green;
            else
                report.regressions.insert(o.test.name);
        } else if (baseline.red.count(o.test.name)) {
            if (passed)
                report.promotions.insert(o.test.name);
            else
                ++report.unchanged_red;
        }
    }
    return report;
}

// run_suite restricted to the baseline's green set.
inline std::vector<TestOutcome> run_suite(const std::vector<TestCase>& tests,
                                          const ToolchainSpec& tc, const TargetSpec& tgt,
                                          double timeout_s, const GreenRedList& filter,
                                          RunSuiteOptions opts = {}) {
    opts.green = &filter.green;
    return run_suite(tests, tc, tgt, timeout_s, opts);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline json to_json(const GreenRedList& list) {
    return json{{"toolchain_id", list.toolchain_id},
                {"target_id", list.target_id},
                {"suite_id", list.suite_id},
                {"baseline_pin", list.baseline_pin},
                {"created_at", format_iso8601(list.created_at)},
                {"green", std::vector<std::string>(list.green.begin(), list.green.end())},
                {"red", std::vector<std::string>(list.red.begin(), list.red.end())}};
}

inline GreenRedList green_red_list_from_json(const json& j) {
    GreenRedList list;
    list.toolchain_id = j.at("toolchain_id").get<std::string>();
    list.target_id = j.at("target_id").get<std::string>();
    list.suite_id = j.at("suite_id").get<std::string>();
    list.baseline_pin = j.at("baseline_pin").get<std::string>();
    list.created_at = parse_iso8601(j.at("created_at").get<std::string>());
    for (const auto& e : j.at("green")) list.green.insert(e.get<std::string>());
    for (const auto& e : j.at("red")) list.red.insert(e.get<std::string>());
    return list;
}

inline std::string green_list_filename(const GreenRedList& list) {
    return "greenlist-" + list.toolchain_id + "-" + list.target_id + "-" + list.suite_id + ".json";
}

inline json to_json(const RegressionReport& r) {
    return json{
        {"list_ref",
         {{"toolchain_id", r.toolchain_id}, {"target_id", r.target_id}, {"suite_id", r.suite_id}}},
        {"regressions", std::vector<std::string>(r.regressions.begin(), r.regressions.end())},
        {"promotions", std::vector<std::string>(r.promotions.begin(), r.promotions.end())},
        {"unchanged_green", r.unchanged_green},
        {"unchanged_red", r.unchanged_red}};
}

} // namespace ompforge
