#pragma once

#include "ompforge/bench.hpp"
#include "ompforge/config.hpp"
#include "ompforge/greenlist.hpp"
#include "ompforge/pipeline.hpp"
#include "ompforge/report.hpp"
#include "ompforge/suite.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

namespace ompforge {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
}

struct RunOptions {
    std::string system_label = "local";
    int parallelism = 0;           // 0: use Config.job_parallelism
    int bench_runs = 3;
    std::string snapshot_out;      // empty: <workspace>/snapshot-<id>.json
    std::string greenlist_dir;     // empty: run full suites, no green filtering
    const Clock* clock = nullptr;  // null: system clock
};

struct RunArtifacts {
    PipelineGraph graph;
    PipelineResult result;
    ResultsSnapshot snapshot;
    std::string pipeline_file;
    std::string snapshot_file;
};

namespace detail {

// Outcome store shared by concurrently running jobs. Keyed by the job's
// position in the graph so snapshot content is independent of scheduling.
struct ResultStore {
    std::mutex mu;
    std::map<std::size_t, std::vector<TestOutcome>> suite_outcomes;
    std::map<std::size_t, std::vector<BenchResult>> bench_results;
};

inline JobOutcome run_fetch_job(const Job& job, const Config& cfg) {
    const SuiteSpec* suite = cfg.find_suite(job.suite_or_bench_id);
    if (!suite) return {JobStatus::fail, "unknown suite '" + job.suite_or_bench_id + "'"};
    std::error_code ec;
    if (!std::filesystem::is_directory(suite->root, ec))
        return {JobStatus::fail, "suite root missing: '" + suite->root + "'"};
    return {JobStatus::pass, "sources at pin " + suite->pinned_commit};
}

inline JobOutcome run_build_job(const Job& job, const Config& cfg) {
    const ToolchainSpec* tc = cfg.find_toolchain(job.toolchain_id);
    if (!tc) return {JobStatus::fail, "unknown toolchain '" + job.toolchain_id + "'"};
    if (tc->kind == ToolchainKind::mock) {
        try {
            load_manifest_file(tc->c_compiler);
        } catch (const Error& e) {
            return {JobStatus::fail, e.what()};
        }
        return {JobStatus::pass, "mock toolchain ready"};
    }
    for (const std::string* exe : {&tc->c_compiler, &tc->cxx_compiler}) {
        if (!executable_available(*exe))
            return {JobStatus::fail, "compiler not found: '" + *exe + "'"};
    }
    std::string detail_text = "toolchain ready";
    if (!tc->version_probe_args.empty()) {
        std::vector<std::string> argv{tc->c_compiler};
        argv.insert(argv.end(), tc->version_probe_args.begin(), tc->version_probe_args.end());
        ProcessResult p = run_argv(argv, 30.0);
        if (p.exit_code != 0) return {JobStatus::fail, "version probe failed: " + p.output};
        auto newline = p.output.find('\n');
        detail_text = p.output.substr(0, newline == std::string::npos ? p.output.size() : newline);
    }
    return {JobStatus::pass, detail_text};
}

inline JobOutcome run_suite_job(const Job& job, std::size_t job_index, const Config& cfg,
                                const RunOptions& opts, const PipelineGraph& graph,
                                ResultStore& store) {
    const SuiteSpec* suite = cfg.find_suite(job.suite_or_bench_id);
    const ToolchainSpec* tc = cfg.find_toolchain(job.toolchain_id);
    const TargetSpec* tgt = cfg.find_target(job.target_id);
    if (!suite || !tc || !tgt) return {JobStatus::fail, "dangling job reference"};

    std::vector<TestCase> tests = discover_tests(*suite);
    std::string unlisted_note;
    std::set<std::string> green;
    bool filtered = false;
    if (!opts.greenlist_dir.empty()) {
        std::string list_path = opts.greenlist_dir + "/greenlist-" + tc->id + "-" + tgt->id + "-" +
                                suite->id + ".json";
        std::error_code ec;
        if (std::filesystem::exists(list_path, ec)) {
            GreenRedList list = green_red_list_from_json(json::parse(read_text_file(list_path)));
            GreenFilterResult fr = filter_green(tests, list);
            tests = std::move(fr.kept);
            green = list.green;
            filtered = true;
            if (!fr.unlisted.empty()) {
                unlisted_note = "; unlisted: ";
                for (std::size_t i = 0; i < fr.unlisted.size(); ++i) {
                    if (i) unlisted_note += ',';
                    if (i == 8) {
                        unlisted_note += "...";
                        break;
                    }
                    unlisted_note += fr.unlisted[i];
                }
            }
        }
    }

    MockManifest manifest;
    RunSuiteOptions so;
    so.suite_root = suite->root;
    so.work_root = cfg.workspace_dir + "/" + graph.pipeline_id + "/" + tc->id + "/" + tgt->id +
                   "/" + suite->id;
    if (tc->kind == ToolchainKind::mock) {
        manifest = load_manifest_file(tc->c_compiler);
        so.manifest = &manifest;
    }
    std::vector<TestOutcome> outcomes = run_suite(tests, *tc, *tgt, cfg.test_timeout_s, so);

    json outcome_list = json::array();
    for (const TestOutcome& o : outcomes) outcome_list.push_back(to_json(o));
    write_text_file(so.work_root + "/outcomes.json", outcome_list.dump(2) + "\n");

    std::size_t passed = 0;
    double total_seconds = 0.0;
    for (const TestOutcome& o : outcomes) {
        if (o.phase_result == PhaseResult::pass) ++passed;
        total_seconds += o.compile_seconds + o.run_seconds;
    }
    const std::size_t executed = outcomes.size();
    {
        std::lock_guard<std::mutex> lock(store.mu);
        store.suite_outcomes[job_index] = std::move(outcomes);
    }

    // Job-level ceiling: a suite run may not exceed test_timeout_s per test
    // in aggregate.
    if (executed > 0 && total_seconds > cfg.test_timeout_s * static_cast<double>(executed))
        return {JobStatus::fail, "timeout"};

    std::ostringstream detail_text;
    detail_text << executed << " tests: " << passed << " pass, " << (executed - passed) << " fail";
    if (filtered) detail_text << " (green-list run)";
    detail_text << unlisted_note;
    return {passed == executed ? JobStatus::pass : JobStatus::fail, detail_text.str()};
}

inline JobOutcome run_bench_job(const Job& job, std::size_t job_index, const Config& cfg,
                                const RunOptions& opts, const PipelineGraph& graph,
                                ResultStore& store) {
    const BenchApp* app = cfg.find_benchmark(job.suite_or_bench_id);
    const ToolchainSpec* tc = cfg.find_toolchain(job.toolchain_id);
    const TargetSpec* tgt = cfg.find_target(job.target_id);
    if (!app || !tc || !tgt) return {JobStatus::fail, "dangling job reference"};

    MockManifest manifest;
    RunBenchOptions bo;
    bo.work_dir = cfg.workspace_dir + "/" + graph.pipeline_id + "/" + tc->id + "/" + tgt->id +
                  "/bench/" + app->id;
    if (tc->kind == ToolchainKind::mock) {
        manifest = load_manifest_file(tc->c_compiler);
        bo.manifest = &manifest;
    }

    std::vector<BenchResult> results;
    bool all_timed = true;
    std::ostringstream detail_text;
    for (ModelVariant variant : app->model_variants) {
        BenchResult r = run_benchmark(*app, variant, *tc, *tgt, opts.bench_runs,
                                      cfg.test_timeout_s, bo);
        if (detail_text.tellp() > 0) detail_text << ", ";
        detail_text << to_string(variant) << " ";
        if (r.status == BenchStatusKind::time)
            detail_text << format_seconds(r.estimated_base_seconds);
        else
            detail_text << to_string(r.status);
        if (r.status != BenchStatusKind::time) all_timed = false;
        results.push_back(std::move(r));
    }
    {
        std::lock_guard<std::mutex> lock(store.mu);
        store.bench_results[job_index] = std::move(results);
    }
    return {all_timed ? JobStatus::pass : JobStatus::fail, detail_text.str()};
}

inline JobOutcome run_cleanup_job(const Config& cfg, const PipelineGraph& graph) {
    namespace fs = std::filesystem;
    std::size_t removed = 0;
    std::error_code ec;
    fs::path root = fs::path(cfg.workspace_dir) / graph.pipeline_id;
    if (fs::is_directory(root, ec)) {
        for (fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec), end;
             it != end; ++it) {
            if (it->is_regular_file(ec) && it->path().filename() == "binary") {
                if (fs::remove(it->path(), ec)) ++removed;
            }
        }
    }
    return {JobStatus::pass, "removed " + std::to_string(removed) + " build artifacts"};
}

} // namespace detail

// Plan and execute one pipeline for `cadence`, persisting the pipeline
// result and a results snapshot into the workspace. The caller is expected
// to have validated the config.
inline RunArtifacts run_configured_pipeline(const Config& cfg, Cadence cadence,
                                            const RunOptions& opts = {}) {
    SystemClock system_clock;
    const Clock& clock = opts.clock ? *opts.clock : static_cast<const Clock&>(system_clock);

    RunArtifacts art;
    art.graph = plan_pipeline(cfg, cadence, clock.now());

    std::error_code ec;
    std::filesystem::create_directories(cfg.workspace_dir, ec);

    detail::ResultStore store;
    std::map<std::string, std::size_t> job_index;
    for (std::size_t i = 0; i < art.graph.jobs.size(); ++i) job_index[art.graph.jobs[i].id] = i;

    JobRunner runner = [&](const Job& job) -> JobOutcome {
        std::size_t index = job_index.at(job.id);
        switch (job.kind) {
        case JobKind::fetch_source: return detail::run_fetch_job(job, cfg);
        case JobKind::build_toolchain: return detail::run_build_job(job, cfg);
        case JobKind::run_suite:
            return detail::run_suite_job(job, index, cfg, opts, art.graph, store);
        case JobKind::run_bench:
            return detail::run_bench_job(job, index, cfg, opts, art.graph, store);
        case JobKind::cleanup_workspace: return detail::run_cleanup_job(cfg, art.graph);
        }
        return {JobStatus::fail, "unknown job kind"};
    };

    int parallelism = opts.parallelism > 0 ? opts.parallelism : cfg.job_parallelism;
    art.result = execute_pipeline(art.graph, runner, parallelism, clock);

    art.snapshot.snapshot_id = art.graph.pipeline_id;
    art.snapshot.captured_at = clock.now();
    art.snapshot.system_label = opts.system_label;
    art.snapshot.commit_pins = art.graph.commit_pins;
    for (auto& [index, outcomes] : store.suite_outcomes) {
        (void)index;
        art.snapshot.outcomes.insert(art.snapshot.outcomes.end(), outcomes.begin(), outcomes.end());
    }
    for (auto& [index, results] : store.bench_results) {
        (void)index;
        art.snapshot.bench.insert(art.snapshot.bench.end(), results.begin(), results.end());
    }

    art.pipeline_file = cfg.workspace_dir + "/pipeline-" + art.graph.pipeline_id + ".json";
    write_text_file(art.pipeline_file, to_json(art.graph, art.result).dump(2) + "\n");
    bool has_bench_jobs = std::any_of(art.graph.jobs.begin(), art.graph.jobs.end(),
                                      [](const Job& j) { return j.kind == JobKind::run_bench; });
    if (has_bench_jobs) {
        json bench = json::array();
        for (const auto& b : art.snapshot.bench) bench.push_back(to_json(b));
        write_text_file(cfg.workspace_dir + "/bench-" + art.graph.pipeline_id + ".json",
                        bench.dump(2) + "\n");
    }
    art.snapshot_file = opts.snapshot_out.empty()
                            ? cfg.workspace_dir + "/snapshot-" + art.snapshot.snapshot_id + ".json"
                            : opts.snapshot_out;
    write_text_file(art.snapshot_file, to_json(art.snapshot).dump(2) + "\n");
    return art;
}

} // namespace ompforge
