#include "fixtures.hpp"

#include "ompforge/pipeline.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ompforge;

namespace {

// One toolchain (C/C++/Fortran), two GPUs, three suites: the reference
// hourly workflow.
Config reference_config(const std::string& root) {
    Config cfg;
    ToolchainSpec tc;
    tc.id = "llvm";
    tc.c_compiler = "clang";
    tc.cxx_compiler = "clang++";
    tc.fortran_compiler = "flang-new";
    cfg.toolchains.push_back(tc);
    for (const char* id : {"mi210", "h100"}) {
        TargetSpec t;
        t.id = id;
        t.vendor = id[0] == 'm' ? Vendor::amd : Vendor::nvidia;
        t.offload_flags = {"-fopenmp"};
        cfg.targets.push_back(t);
    }
    for (const char* id : {"ompvv", "smoke", "hecbench"}) {
        SuiteSpec s;
        s.id = id;
        s.root = root;
        s.pinned_commit = std::string(id) + "-pin";
        s.languages = {Language::C, Language::Cxx, Language::Fortran};
        cfg.suites.push_back(s);
        cfg.triggers.push_back({id, Cadence::hourly});
    }
    BenchApp spec;
    spec.id = "spechpc";
    spec.language = Language::C;
    spec.model_variants = {ModelVariant::TGT};
    cfg.benchmarks.push_back(spec);
    cfg.triggers.push_back({"spechpc", Cadence::weekly});
    cfg.workspace_dir = root + "/ws";
    return cfg;
}

TEST(PlanPipeline, HourlyMakesTwoBuildAndSixTestJobs) {
    fixtures::TempDir tmp("plan");
    PipelineGraph g = plan_pipeline(reference_config(tmp.path()), Cadence::hourly, 1700000000);
    auto counts = job_counts_by_stage(g);
    EXPECT_EQ(counts[Stage::build], 2);
    EXPECT_EQ(counts[Stage::test], 6);
    EXPECT_EQ(counts[Stage::setup], 3);
    EXPECT_EQ(counts[Stage::cleanup], 1);
    for (const Job& j : g.jobs)
        if (j.kind == JobKind::run_suite || j.kind == JobKind::run_bench) {
            EXPECT_FALSE(j.toolchain_id.empty());
            EXPECT_FALSE(j.target_id.empty());
        }
    EXPECT_EQ(g.commit_pins.at("ompvv"), "ompvv-pin");
}

TEST(PlanPipeline, WeeklyIsBenchOnly) {
    fixtures::TempDir tmp("plan");
    PipelineGraph g = plan_pipeline(reference_config(tmp.path()), Cadence::weekly, 1700000000);
    int suites = 0, benches = 0;
    for (const Job& j : g.jobs) {
        suites += j.kind == JobKind::run_suite;
        benches += j.kind == JobKind::run_bench;
        EXPECT_NE(j.kind, JobKind::fetch_source); // benchmarks are never fetched
    }
    EXPECT_EQ(suites, 0);
    EXPECT_EQ(benches, 2); // 1 bench x 1 toolchain x 2 targets
}

TEST(PlanPipeline, NoTriggeredWorkIsPlanError) {
    fixtures::TempDir tmp("plan");
    EXPECT_THROW(plan_pipeline(reference_config(tmp.path()), Cadence::manual, 0), PlanError);
}

TEST(PlanPipeline, CardinalityLaw) {
    fixtures::TempDir tmp("plan");
    Config cfg = reference_config(tmp.path());
    ToolchainSpec gnu;
    gnu.id = "gnu";
    gnu.c_compiler = "gcc";
    gnu.cxx_compiler = "g++"; // no Fortran
    cfg.toolchains.push_back(gnu);
    cfg.suites[1].languages = {Language::Fortran}; // smoke becomes Fortran-only

    PipelineGraph g = plan_pipeline(cfg, Cadence::hourly, 0);
    auto counts = job_counts_by_stage(g);
    EXPECT_EQ(counts[Stage::build], 2 * 2); // toolchains x targets
    // suites: ompvv + hecbench run for both toolchains , smoke only for llvm
    int expected_tests = 2 * 2 * 2 + 1 * 2;
    EXPECT_EQ(counts[Stage::test], expected_tests);
}

TEST(PlanPipeline, DeterministicIds) {
    fixtures::TempDir tmp("plan");
    PipelineGraph a = plan_pipeline(reference_config(tmp.path()), Cadence::hourly, 42);
    PipelineGraph b = plan_pipeline(reference_config(tmp.path()), Cadence::hourly, 42);
    ASSERT_EQ(a.jobs.size(), b.jobs.size());
    for (std::size_t i = 0; i < a.jobs.size(); ++i) EXPECT_EQ(a.jobs[i], b.jobs[i]);
    EXPECT_EQ(a.pipeline_id, b.pipeline_id);
}

// --- rollup ----------------------------------------------------------------

TEST(Rollup, EmptyIsVacuouslyGreen) {
    auto [stages, overall] = rollup_status({}, {});
    EXPECT_EQ(overall, StageStatus::pass);
    for (Stage s : all_stages()) EXPECT_EQ(stages.at(s), StageStatus::pass);
}

TEST(Rollup, SingleTestFailureFailsPipeline) {
    std::vector<Job> jobs(2);
    jobs[0].id = "b";
    jobs[0].stage = Stage::build;
    jobs[1].id = "t";
    jobs[1].stage = Stage::test;
    std::vector<JobResult> results(2);
    results[0].job_id = "b";
    results[0].status = JobStatus::pass;
    results[1].job_id = "t";
    results[1].status = JobStatus::fail;
    auto [stages, overall] = rollup_status(jobs, results);
    EXPECT_EQ(stages.at(Stage::build), StageStatus::pass);
    EXPECT_EQ(stages.at(Stage::test), StageStatus::fail);
    EXPECT_EQ(overall, StageStatus::fail);
}

// Exhaustive check against a one-line reference for every status
// assignment over small job sets.
TEST(Rollup, MatchesBruteForceOverAllAssignments) {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> stage_dist(0, 3);
    const JobStatus statuses[3] = {JobStatus::pass, JobStatus::fail, JobStatus::skipped};

    for (int n = 0; n <= 4; ++n) {
        for (int trial = 0; trial < 8; ++trial) {
            std::vector<Job> jobs(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                jobs[static_cast<std::size_t>(i)].id = "j" + std::to_string(i);
                jobs[static_cast<std::size_t>(i)].stage =
                    all_stages()[static_cast<std::size_t>(stage_dist(rng))];
            }
            int assignments = 1;
            for (int i = 0; i < n; ++i) assignments *= 3;
            for (int mask = 0; mask < assignments; ++mask) {
                std::vector<JobResult> results(static_cast<std::size_t>(n));
                int code = mask;
                for (int i = 0; i < n; ++i) {
                    results[static_cast<std::size_t>(i)].job_id = "j" + std::to_string(i);
                    results[static_cast<std::size_t>(i)].status = statuses[code % 3];
                    code /= 3;
                }
                auto [stages, overall] = rollup_status(jobs, results);

                // reference: a stage fails iff any of its jobs is not pass
                std::map<Stage, bool> any_bad;
                for (int i = 0; i < n; ++i)
                    if (results[static_cast<std::size_t>(i)].status != JobStatus::pass)
                        any_bad[jobs[static_cast<std::size_t>(i)].stage] = true;
                bool all_ok = true;
                for (Stage s : all_stages()) {
                    StageStatus want = any_bad[s] ? StageStatus::fail : StageStatus::pass;
                    EXPECT_EQ(stages.at(s), want);
                    if (want == StageStatus::fail) all_ok = false;
                }
                EXPECT_EQ(overall, all_ok ? StageStatus::pass : StageStatus::fail);
            }
        }
    }
}

// --- execution --------------------------------------------------------------

TEST(ExecutePipeline, FailedBuildSkipsDownstreamSuites) {
    fixtures::TempDir tmp("exec");
    PipelineGraph g = plan_pipeline(reference_config(tmp.path()), Cadence::hourly, 0);
    JobRunner runner = [](const Job& job) -> JobOutcome {
        if (job.id == "build:llvm:mi210") return {JobStatus::fail, "simulated build break"};
        return {JobStatus::pass, ""};
    };
    PipelineResult r = execute_pipeline(g, runner, 4, FixedClock(0));

    int skipped = 0;
    for (const JobResult& jr : r.job_results) {
        if (jr.status == JobStatus::skipped) {
            ++skipped;
            EXPECT_NE(jr.job_id.find(":mi210"), std::string::npos);
            EXPECT_NE(jr.detail.find("build:llvm:mi210"), std::string::npos);
        }
    }
    EXPECT_EQ(skipped, 3); // three suites on the broken toolchain x target
    EXPECT_EQ(r.stage_status.at(Stage::build), StageStatus::fail);
    EXPECT_EQ(r.stage_status.at(Stage::test), StageStatus::fail); // skips count
    EXPECT_EQ(r.overall, StageStatus::fail);
}

TEST(ExecutePipeline, OneSuiteFailureKeepsBuildGreen) {
    fixtures::TempDir tmp("exec");
    PipelineGraph g = plan_pipeline(reference_config(tmp.path()), Cadence::hourly, 0);
    JobRunner runner = [](const Job& job) -> JobOutcome {
        if (job.kind == JobKind::run_suite && job.id == "suite:ompvv:llvm:h100")
            return {JobStatus::fail, "42 tests: 40 pass, 2 fail"};
        return {JobStatus::pass, ""};
    };
    PipelineResult r = execute_pipeline(g, runner, 2, FixedClock(0));
    EXPECT_EQ(r.stage_status.at(Stage::build), StageStatus::pass);
    EXPECT_EQ(r.stage_status.at(Stage::test), StageStatus::fail);
    EXPECT_EQ(r.overall, StageStatus::fail);
}

TEST(ExecutePipeline, AllPassIsGreen) {
    fixtures::TempDir tmp("exec");
    PipelineGraph g = plan_pipeline(reference_config(tmp.path()), Cadence::hourly, 0);
    PipelineResult r =
        execute_pipeline(g, [](const Job&) -> JobOutcome { return {JobStatus::pass, ""}; }, 8,
                         FixedClock(7));
    EXPECT_EQ(r.overall, StageStatus::pass);
    for (Stage s : all_stages()) EXPECT_EQ(r.stage_status.at(s), StageStatus::pass);
    for (const JobResult& jr : r.job_results) EXPECT_EQ(jr.started_at, 7);
}

TEST(ExecutePipeline, CleanupRunsAfterFailuresAndItsFailureFailsPipeline) {
    fixtures::TempDir tmp("exec");
    PipelineGraph g = plan_pipeline(reference_config(tmp.path()), Cadence::hourly, 0);

    bool cleanup_ran = false;
    JobRunner runner = [&](const Job& job) -> JobOutcome {
        if (job.kind == JobKind::run_suite) return {JobStatus::fail, ""};
        if (job.kind == JobKind::cleanup_workspace) cleanup_ran = true;
        return {JobStatus::pass, ""};
    };
    PipelineResult r = execute_pipeline(g, runner, 1, FixedClock(0));
    EXPECT_TRUE(cleanup_ran);
    EXPECT_EQ(r.stage_status.at(Stage::cleanup), StageStatus::pass);

    // cleanup failing on an otherwise green run turns the pipeline red
    JobRunner cleanup_breaks = [](const Job& job) -> JobOutcome {
        if (job.kind == JobKind::cleanup_workspace) return {JobStatus::fail, "disk full"};
        return {JobStatus::pass, ""};
    };
    PipelineResult r2 = execute_pipeline(g, cleanup_breaks, 1, FixedClock(0));
    EXPECT_EQ(r2.stage_status.at(Stage::test), StageStatus::pass);
    EXPECT_EQ(r2.overall, StageStatus::fail);
}

TEST(ExecutePipeline, RunnerExceptionBecomesJobFailure) {
    PipelineGraph g;
    g.pipeline_id = "p";
    Job j;
    j.id = "only";
    j.stage = Stage::test;
    j.kind = JobKind::run_suite;
    g.jobs.push_back(j);
    PipelineResult r = execute_pipeline(
        g, [](const Job&) -> JobOutcome { throw IoError("boom"); }, 1, FixedClock(0));
    EXPECT_EQ(r.job_results[0].status, JobStatus::fail);
    EXPECT_NE(r.job_results[0].detail.find("boom"), std::string::npos);
}

TEST(ExecutePipeline, BadGraphIsEngineError) {
    PipelineGraph g;
    Job a, b;
    a.id = "a";
    a.stage = Stage::test;
    b.id = "b";
    b.stage = Stage::test;
    b.depends_on = {"a"}; // same stage: forbidden (this is what makes cycles impossible)
    g.jobs = {a, b};
    auto runner = [](const Job&) -> JobOutcome { return {JobStatus::pass, ""}; };
    EXPECT_THROW(execute_pipeline(g, runner, 1, FixedClock(0)), EngineError);

    PipelineGraph g2;
    Job c;
    c.id = "c";
    c.stage = Stage::test;
    c.depends_on = {"ghost"};
    g2.jobs = {c};
    EXPECT_THROW(execute_pipeline(g2, runner, 1, FixedClock(0)), EngineError);
}

TEST(ExecutePipeline, StatusesMatchOracleAcrossParallelism) {
    std::mt19937 rng(2024);
    for (int round = 0; round < 300; ++round) {
        fixtures::RandomDagCase dag = fixtures::make_random_dag(rng, 12);
        auto expected = fixtures::oracle_statuses(dag.graph, dag.planned);
        for (int parallelism : {1, 2, 8}) {
            PipelineResult r = execute_pipeline(dag.graph, fixtures::planned_runner(dag.planned),
                                                parallelism, FixedClock(0));
            for (const JobResult& jr : r.job_results)
                ASSERT_EQ(jr.status, expected.at(jr.job_id))
                    << "round " << round << " parallelism " << parallelism << " job " << jr.job_id;
        }
    }
}

TEST(ExecutePipeline, MonotonicityUnderSingleFlip) {
    std::mt19937 rng(99);
    for (int round = 0; round < 150; ++round) {
        fixtures::RandomDagCase dag = fixtures::make_random_dag(rng, 8);
        PipelineResult before = execute_pipeline(dag.graph, fixtures::planned_runner(dag.planned),
                                                 1, FixedClock(0));
        for (const auto& [id, status] : dag.planned) {
            if (status != JobStatus::pass) continue;
            auto flipped = dag.planned;
            flipped[id] = JobStatus::fail;
            PipelineResult after =
                execute_pipeline(dag.graph, fixtures::planned_runner(flipped), 1, FixedClock(0));
            EXPECT_FALSE(before.overall == StageStatus::fail && after.overall == StageStatus::pass)
                << "flipping " << id << " un-failed the pipeline";
        }
    }
}

} // namespace
