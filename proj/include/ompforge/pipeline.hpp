#pragma once

#include "ompforge/clock.hpp"
#include "ompforge/config.hpp"
#include "ompforge/errors.hpp"

#include <array>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace ompforge {

enum class Stage { setup, build, test, cleanup };

inline const char* to_string(Stage s) {
    switch (s) {
    case Stage::setup: return "setup";
    case Stage::build: return "build";
    case Stage::test: return "test";
    case Stage::cleanup: return "cleanup";
    }
    return "?";
}

inline const std::array<Stage, 4>& all_stages() {
    static const std::array<Stage, 4> s = {Stage::setup, Stage::build, Stage::test, Stage::cleanup};
    return s;
}

enum class JobKind { fetch_source, build_toolchain, run_suite, run_bench, cleanup_workspace };

inline const char* to_string(JobKind k) {
    switch (k) {
    case JobKind::fetch_source: return "fetch_source";
    case JobKind::build_toolchain: return "build_toolchain";
    case JobKind::run_suite: return "run_suite";
    case JobKind::run_bench: return "run_bench";
    case JobKind::cleanup_workspace: return "cleanup_workspace";
    }
    return "?";
}

enum class JobStatus { pass, fail, skipped };

inline const char* to_string(JobStatus s) {
    switch (s) {
    case JobStatus::pass: return "pass";
    case JobStatus::fail: return "fail";
    case JobStatus::skipped: return "skipped";
    }
    return "?";
}

enum class StageStatus { pass, fail };

inline const char* to_string(StageStatus s) { return s == StageStatus::pass ? "pass" : "fail"; }

// One unit of work. Dependencies may only point at jobs in strictly
// earlier stages, which also rules cycles out by construction.
struct Job {
    std::string id;
    Stage stage = Stage::setup;
    JobKind kind = JobKind::fetch_source;
    std::string toolchain_id;      // empty when not applicable
    std::string target_id;
    std::string suite_or_bench_id;
    std::set<std::string> depends_on;

    bool operator==(const Job&) const = default;
};

struct PipelineGraph {
    std::string pipeline_id;
    Cadence cadence = Cadence::manual;
    Timestamp triggered_at = 0;
    std::map<std::string, std::string> commit_pins; // suite id -> pin
    std::vector<Job> jobs;

    const Job* find_job(const std::string& id) const {
        for (const auto& j : jobs)
            if (j.id == id) return &j;
        return nullptr;
    }
};

struct JobResult {
    std::string job_id;
    JobStatus status = JobStatus::pass;
    Timestamp started_at = 0;
    Timestamp ended_at = 0;
    std::string detail;

    bool operator==(const JobResult&) const = default;
};

struct PipelineResult {
    std::string pipeline_id;
    std::vector<JobResult> job_results; // graph job order
    std::map<Stage, StageStatus> stage_status;
    StageStatus overall = StageStatus::pass;
};

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

inline std::string job_id_for(JobKind kind, const std::string& suite_or_bench = {},
                              const std::string& toolchain = {}, const std::string& target = {}) {
    switch (kind) {
    case JobKind::fetch_source: return "fetch:" + suite_or_bench;
    case JobKind::build_toolchain: return "build:" + toolchain + ":" + target;
    case JobKind::run_suite: return "suite:" + suite_or_bench + ":" + toolchain + ":" + target;
    case JobKind::run_bench: return "bench:" + suite_or_bench + ":" + toolchain + ":" + target;
    case JobKind::cleanup_workspace: return "cleanup";
    }
    return "?";
}

// Expand a validated config into the job DAG for one trigger cadence:
// fetch jobs for the triggered suites (benchmarks are never fetched — their
// sources are provisioned out of band), one build per toolchain×target, one
// run job per eligible triple, and a single trailing cleanup job.
inline PipelineGraph plan_pipeline(const Config& cfg, Cadence cadence, Timestamp now) {
    std::set<std::string> triggered;
    for (const auto& t : cfg.triggers)
        if (t.cadence == cadence) triggered.insert(t.suite_or_bench_id);

    std::vector<const SuiteSpec*> suites;
    for (const auto& s : cfg.suites)
        if (triggered.count(s.id)) suites.push_back(&s);
    std::vector<const BenchApp*> benches;
    for (const auto& b : cfg.benchmarks)
        if (triggered.count(b.id)) benches.push_back(&b);

    if (suites.empty() && benches.empty())
        throw PlanError("no suite or benchmark is triggered at cadence '" +
                        std::string(to_string(cadence)) + "'");

    PipelineGraph g;
    g.cadence = cadence;
    g.triggered_at = now;
    g.pipeline_id = std::string(to_string(cadence)) + "-" + format_compact_utc(now);

    for (const SuiteSpec* s : suites) {
        g.commit_pins[s->id] = s->pinned_commit;
        Job j;
        j.id = job_id_for(JobKind::fetch_source, s->id);
        j.stage = Stage::setup;
        j.kind = JobKind::fetch_source;
        j.suite_or_bench_id = s->id;
        g.jobs.push_back(std::move(j));
    }

    for (const auto& tc : cfg.toolchains) {
        for (const auto& tgt : cfg.targets) {
            Job j;
            j.id = job_id_for(JobKind::build_toolchain, {}, tc.id, tgt.id);
            j.stage = Stage::build;
            j.kind = JobKind::build_toolchain;
            j.toolchain_id = tc.id;
            j.target_id = tgt.id;
            g.jobs.push_back(std::move(j));
        }
    }

    std::vector<std::string> test_job_ids;
    for (const SuiteSpec* s : suites) {
        for (const auto& tc : cfg.toolchains) {
            bool eligible = false;
            for (Language lang : s->languages)
                if (tc.supports(lang)) eligible = true;
            if (!eligible) continue;
            for (const auto& tgt : cfg.targets) {
                Job j;
                j.id = job_id_for(JobKind::run_suite, s->id, tc.id, tgt.id);
                j.stage = Stage::test;
                j.kind = JobKind::run_suite;
                j.toolchain_id = tc.id;
                j.target_id = tgt.id;
                j.suite_or_bench_id = s->id;
                j.depends_on = {job_id_for(JobKind::fetch_source, s->id),
                                job_id_for(JobKind::build_toolchain, {}, tc.id, tgt.id)};
                test_job_ids.push_back(j.id);
                g.jobs.push_back(std::move(j));
            }
        }
    }
    for (const BenchApp* b : benches) {
        for (const auto& tc : cfg.toolchains) {
            if (!tc.supports(b->language)) continue;
            for (const auto& tgt : cfg.targets) {
                Job j;
                j.id = job_id_for(JobKind::run_bench, b->id, tc.id, tgt.id);
                j.stage = Stage::test;
                j.kind = JobKind::run_bench;
                j.toolchain_id = tc.id;
                j.target_id = tgt.id;
                j.suite_or_bench_id = b->id;
                j.depends_on = {job_id_for(JobKind::build_toolchain, {}, tc.id, tgt.id)};
                test_job_ids.push_back(j.id);
                g.jobs.push_back(std::move(j));
            }
        }
    }

    Job cleanup;
    cleanup.id = job_id_for(JobKind::cleanup_workspace);
    cleanup.stage = Stage::cleanup;
    cleanup.kind = JobKind::cleanup_workspace;
    cleanup.depends_on.insert(test_job_ids.begin(), test_job_ids.end());
    g.jobs.push_back(std::move(cleanup));

    return g;
}

inline std::map<Stage, int> job_counts_by_stage(const PipelineGraph& g) {
    std::map<Stage, int> counts;
    for (Stage s : all_stages()) counts[s] = 0;
    for (const Job& j : g.jobs) counts[j.stage]++;
    return counts;
}

// ---------------------------------------------------------------------------
// Rollup
// ---------------------------------------------------------------------------

// A stage fails when any of its jobs failed or was skipped; an empty stage
// passes vacuously. The pipeline passes only when every stage does.
inline std::pair<std::map<Stage, StageStatus>, StageStatus>
rollup_status(const std::vector<Job>& jobs, const std::vector<JobResult>& results) {
    std::map<std::string, Stage> stage_of;
    for (const Job& j : jobs) stage_of[j.id] = j.stage;
    std::map<Stage, StageStatus> per_stage;
    for (Stage s : all_stages()) per_stage[s] = StageStatus::pass;
    for (const JobResult& r : results) {
        auto it = stage_of.find(r.job_id);
        if (it == stage_of.end())
            throw EngineError("result for unknown job '" + r.job_id + "'");
        if (r.status != JobStatus::pass) per_stage[it->second] = StageStatus::fail;
    }
    StageStatus overall = StageStatus::pass;
    for (const auto& [stage, status] : per_stage) {
        (void)stage;
        if (status == StageStatus::fail) overall = StageStatus::fail;
    }
    return {per_stage, overall};
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct JobOutcome {
    JobStatus status = JobStatus::pass; // runner returns pass or fail
    std::string detail;
};

using JobRunner = std::function<JobOutcome(const Job&)>;

namespace detail {

struct ExecState {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::size_t> ready;
    std::vector<int> unmet;                    // outstanding dependency count
    std::vector<JobStatus> status;
    std::vector<bool> done;
    std::vector<std::string> detail;
    std::vector<Timestamp> started, ended;
    std::vector<std::vector<std::size_t>> dependents;
    std::size_t remaining = 0;
};

} // namespace detail

// Run every job either to completion or to a skip. A job with a failed or
// skipped transitive dependency is skipped without invoking the runner —
// except cleanup-stage jobs, which always run (best-effort teardown) once
// their dependencies have settled. Ready jobs execute concurrently up to
// `parallelism`; statuses depend only on runner outcomes, never on
// interleaving.
inline PipelineResult execute_pipeline(const PipelineGraph& graph, const JobRunner& runner,
                                       int parallelism, const Clock& clock = SystemClock{}) {
    if (parallelism < 1) throw EngineError("parallelism must be >= 1");
    const std::vector<Job>& jobs = graph.jobs;
    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!index_of.emplace(jobs[i].id, i).second)
            throw EngineError("duplicate job id '" + jobs[i].id + "'");
    }

    detail::ExecState st;
    st.unmet.assign(jobs.size(), 0);
    st.status.assign(jobs.size(), JobStatus::pass);
    st.done.assign(jobs.size(), false);
    st.detail.assign(jobs.size(), {});
    st.started.assign(jobs.size(), 0);
    st.ended.assign(jobs.size(), 0);
    st.dependents.resize(jobs.size());
    st.remaining = jobs.size();

    for (std::size_t i = 0; i < jobs.size(); ++i) {
        for (const std::string& dep : jobs[i].depends_on) {
            auto it = index_of.find(dep);
            if (it == index_of.end())
                throw EngineError("job '" + jobs[i].id + "' depends on unknown job '" + dep + "'");
            if (!(jobs[it->second].stage < jobs[i].stage))
                throw EngineError("job '" + jobs[i].id + "' depends on '" + dep +
                                  "' which is not in a strictly earlier stage");
            st.dependents[it->second].push_back(i);
            st.unmet[i]++;
        }
        if (st.unmet[i] == 0) st.ready.push_back(i);
    }

    auto worker = [&] {
        std::unique_lock<std::mutex> lock(st.mu);
        while (true) {
            st.cv.wait(lock, [&] { return !st.ready.empty() || st.remaining == 0; });
            if (st.ready.empty()) return; // remaining == 0
            std::size_t i = st.ready.front();
            st.ready.pop_front();

            const Job& job = jobs[i];
            std::string blocked_by;
            if (job.stage != Stage::cleanup) {
                for (const std::string& dep : job.depends_on) {
                    JobStatus ds = st.status[index_of.at(dep)];
                    if (ds != JobStatus::pass) {
                        blocked_by = dep;
                        break;
                    }
                }
            }

            JobStatus status;
            std::string detail_text;
            Timestamp t0 = clock.now(), t1;
            if (!blocked_by.empty()) {
                status = JobStatus::skipped;
                detail_text = "skipped: dependency " + blocked_by + " did not pass";
                t1 = t0;
            } else {
                lock.unlock();
                JobOutcome out;
                try {
                    out = runner(job);
                } catch (const std::exception& e) {
                    out.status = JobStatus::fail;
                    out.detail = std::string("runner error: ") + e.what();
                }
                t1 = clock.now();
                lock.lock();
                status = out.status == JobStatus::pass ? JobStatus::pass : JobStatus::fail;
                detail_text = std::move(out.detail);
            }

            st.status[i] = status;
            st.detail[i] = std::move(detail_text);
            st.started[i] = t0;
            st.ended[i] = t1;
            st.done[i] = true;
            st.remaining--;
            for (std::size_t d : st.dependents[i]) {
                if (--st.unmet[d] == 0) st.ready.push_back(d);
            }
            st.cv.notify_all();
        }
    };

    std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism),
                                                  std::max<std::size_t>(jobs.size(), 1));
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    PipelineResult result;
    result.pipeline_id = graph.pipeline_id;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        JobResult r;
        r.job_id = jobs[i].id;
        r.status = st.status[i];
        r.started_at = st.started[i];
        r.ended_at = st.ended[i];
        r.detail = st.detail[i];
        result.job_results.push_back(std::move(r));
    }
    auto [per_stage, overall] = rollup_status(jobs, result.job_results);
    result.stage_status = std::move(per_stage);
    result.overall = overall;
    return result;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline json to_json(const Job& j) {
    return json{{"id", j.id},
                {"stage", to_string(j.stage)},
                {"kind", to_string(j.kind)},
                {"toolchain_id", j.toolchain_id},
                {"target_id", j.target_id},
                {"suite_or_bench_id", j.suite_or_bench_id},
                {"depends_on", std::vector<std::string>(j.depends_on.begin(), j.depends_on.end())}};
}

inline json to_json(const JobResult& r) {
    return json{{"job_id", r.job_id},
                {"status", to_string(r.status)},
                {"started_at", format_iso8601(r.started_at)},
                {"ended_at", format_iso8601(r.ended_at)},
                {"detail", r.detail}};
}

inline json to_json(const PipelineGraph& g, const PipelineResult& result) {
    json jobs = json::array();
    for (const Job& j : g.jobs) jobs.push_back(to_json(j));
    json results = json::array();
    for (const JobResult& r : result.job_results) results.push_back(to_json(r));
    json stages;
    for (const auto& [stage, status] : result.stage_status) stages[to_string(stage)] = to_string(status);
    return json{{"pipeline_id", g.pipeline_id},
                {"trigger", {{"cadence", to_string(g.cadence)}, {"timestamp", format_iso8601(g.triggered_at)}}},
                {"commit_pins", g.commit_pins},
                {"jobs", jobs},
                {"job_results", results},
                {"stage_status", stages},
                {"overall", to_string(result.overall)}};
}

} // namespace ompforge
