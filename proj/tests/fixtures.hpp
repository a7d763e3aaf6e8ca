#pragma once

// Shared fixture builders: synthetic suite trees, snapshot synthesizers,
// and mock-manifest generators that reproduce target report tables through
// the full pipeline.

#include "ompforge/ompforge.hpp"

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using namespace ompforge;
namespace fs = std::filesystem;

// RAII temp dir under the system temp root.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = fs::temp_directory_path() / ("ompforge-" + tag + "-XXXXXX");
        std::string templ = base.string();
        if (!mkdtemp(templ.data())) throw IoError("mkdtemp failed for " + templ);
        path_ = templ;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::string& path() const { return path_; }
    std::string sub(const std::string& rel) const { return path_ + "/" + rel; }

private:
    std::string path_;
};

inline void write_file(const std::string& path, const std::string& text) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

// ---------------------------------------------------------------------------
// Conformance-suite tree with the reference per-version test counts
// ---------------------------------------------------------------------------

struct VersionCounts {
    const char* version;
    int c, cxx, fortran;
};

// 742 tests total: 252 + 332 + 129 + 29.
inline const std::array<VersionCounts, 4>& suite_tree_counts() {
    static const std::array<VersionCounts, 4> counts = {{
        {"4.5", 134, 14, 104},
        {"5.0", 191, 13, 128},
        {"5.1", 99, 2, 28},
        {"5.2", 16, 8, 5},
    }};
    return counts;
}

inline constexpr int kTreeTotal = 742;
inline constexpr int kTreeCAndCxx = 477; // 440 C + 37 C++
inline constexpr int kTreeFortran = 265;

// Build the synthetic tree under `root`. Stems are unique tree-wide; a
// slice of files sits one directory deeper to exercise nested discovery.
inline void make_conformance_tree(const std::string& root) {
    for (const VersionCounts& vc : suite_tree_counts()) {
        std::string compact = std::string(1, vc.version[0]) + vc.version[2]; // "4.5" -> "45"
        auto emit = [&](const char* lang_tag, const char* ext, int n) {
            for (int i = 0; i < n; ++i) {
                char stem[64];
                std::snprintf(stem, sizeof(stem), "test_%s_%s_%03d", compact.c_str(), lang_tag, i);
                std::string rel = i % 7 == 3 ? std::string(vc.version) + "/kernels/" + stem + ext
                                             : std::string(vc.version) + "/" + stem + ext;
                write_file(root + "/" + rel, "// synthetic conformance test\n");
            }
        };
        emit("c", ".c", vc.c);
        emit("cxx", ".cpp", vc.cxx);
        emit("f", ".F90", vc.fortran);
    }
}

inline SuiteSpec make_tree_suite(const std::string& root, const std::string& id = "ompvv",
                                 const std::string& pin = "c0ffee42") {
    SuiteSpec s;
    s.id = id;
    s.kind = SuiteKind::versioned_conformance;
    s.root = root;
    s.pinned_commit = pin;
    s.languages = {Language::C, Language::Cxx, Language::Fortran};
    return s;
}

// ---------------------------------------------------------------------------
// Reference conformance matrix (per-version pass counts per column)
// ---------------------------------------------------------------------------

struct MatrixColumn {
    const char* system;
    const char* toolchain;
    std::array<int, 4> cxx_passes;     // 4.5, 5.0, 5.1, 5.2 for C & C++
    std::array<int, 4> fortran_passes; // same rows for Fortran
};

inline const std::vector<MatrixColumn>& conformance_matrix_columns() {
    static const std::vector<MatrixColumn> columns = {
        {"Frontier", "amd", {146, 179, 68, 16}, {86, 40, 2, 4}},
        {"Frontier", "cray", {142, 147, 39, 1}, {89, 86, 3, 2}},
        {"Frontier", "gnu", {137, 170, 75, 12}, {104, 110, 19, 4}},
        {"Frontier", "llvm", {147, 171, 66, 10}, {15, 9, 0, 3}},
        {"Perlmutter", "cray", {142, 146, 39, 1}, {88, 81, 3, 2}},
        {"Perlmutter", "gnu", {145, 175, 75, 18}, {104, 107, 19, 4}},
        {"Perlmutter", "llvm", {148, 172, 66, 10}, {15, 9, 0, 3}},
        {"Perlmutter", "nvidia", {131, 67, 13, 2}, {97, 24, 2, 3}},
        {"Sunspot", "intel", {142, 162, 67, 3}, {97, 85, 12, 3}},
    };
    return columns;
}

inline int sum(const std::array<int, 4>& a) { return a[0] + a[1] + a[2] + a[3]; }

// Pick which tests pass so per-(version, group) pass counts hit the target
// quotas: the first N tests of each bucket in discovery order pass.
inline std::set<std::string> select_passing(const std::vector<TestCase>& tests,
                                            const std::array<int, 4>& cxx_quota,
                                            const std::array<int, 4>& fortran_quota) {
    std::map<std::pair<SpecVersion, LanguageGroup>, int> left;
    const auto& versions = known_spec_versions();
    for (std::size_t i = 0; i < versions.size(); ++i) {
        left[{versions[i], LanguageGroup::C_and_CXX}] = cxx_quota[i];
        left[{versions[i], LanguageGroup::Fortran}] = fortran_quota[i];
    }
    std::set<std::string> passing;
    for (const TestCase& t : tests) {
        auto it = left.find({t.spec_version, group_of(t.language)});
        if (it != left.end() && it->second > 0) {
            passing.insert(t.name);
            it->second--;
        }
    }
    return passing;
}

// Synthesize one column's outcomes directly (no pipeline run).
inline std::vector<TestOutcome> synth_outcomes(const std::vector<TestCase>& tests,
                                               const std::string& toolchain_id,
                                               const std::string& target_id,
                                               const std::set<std::string>& passing) {
    std::vector<TestOutcome> outcomes;
    outcomes.reserve(tests.size());
    for (const TestCase& t : tests) {
        TestOutcome o;
        o.test = t;
        o.toolchain_id = toolchain_id;
        o.target_id = target_id;
        o.phase_result = passing.count(t.name) ? PhaseResult::pass : PhaseResult::wrong_answer;
        o.compile_seconds = 0.2;
        o.run_seconds = 0.1;
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

// Mock manifest that reproduces a pass/fail assignment through the full
// compile-and-run path: chosen tests exit 0, everything else exits 1.
inline std::string manifest_for_passing_set(const std::set<std::string>& passing) {
    json per_test = json::object();
    for (const std::string& name : passing)
        per_test[name] = {{"run", "exit:0"}};
    json manifest = {
        {"default_behavior",
         {{"compile", "ok"}, {"run", "exit:1"}, {"compile_seconds", 0.2}, {"run_seconds", 0.1}}},
        {"per_test", per_test},
    };
    return manifest.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Reference benchmark table (base seconds or BE/EE per app × column)
// ---------------------------------------------------------------------------

struct BenchFixtureApp {
    const char* id;
    Language language;
};

inline const std::vector<BenchFixtureApp>& bench_apps() {
    static const std::vector<BenchFixtureApp> apps = {
        {"505.lbm", Language::C},          {"513.soma", Language::C},
        {"518.tealeaf", Language::C},      {"519.clvleaf", Language::Fortran},
        {"521.miniswp", Language::C},      {"528.pot3d", Language::Fortran},
        {"532.sph_exa", Language::Cxx},    {"532.sph_exaM", Language::Cxx},
        {"534.hpgmgfv", Language::C},      {"535.weather", Language::Fortran},
    };
    return apps;
}

// Cell text exactly as the target table prints it: a decimal number,
// "BE", or "EE".
struct BenchSystemFixture {
    const char* system;
    const char* target_id;
    Vendor vendor;
    std::vector<const char*> toolchains;                       // column order
    std::map<std::string, std::vector<const char*>> cells;     // app id -> per-toolchain cell
};

inline const std::vector<BenchSystemFixture>& bench_table_fixture() {
    static const std::vector<BenchSystemFixture> systems = {
        {"Perlmutter",
         "a100",
         Vendor::nvidia,
         {"gnu", "llvm", "cray", "nvidia"},
         {
             {"505.lbm", {"484.89", "38.29", "28.34", "35.9"}},
             {"513.soma", {"855.05", "69.61", "56.75", "65.64"}},
             {"518.tealeaf", {"2200.95", "90.84", "49.09", "40.49"}},
             {"519.clvleaf", {"BE", "BE", "EE", "45.54"}},
             {"521.miniswp", {"EE", "209.55", "96.76", "573.09"}},
             {"528.pot3d", {"926.24", "BE", "55.34", "61.54"}},
             {"532.sph_exa", {"1454.46", "849.6", "EE", "491.41"}},
             {"532.sph_exaM", {"5973.46", "179.41", "128.36", "EE"}},
             {"534.hpgmgfv", {"EE", "156.75", "71.2", "163.33"}},
             {"535.weather", {"1391.84", "BE", "38.51", "42.72"}},
         }},
        {"Frontier",
         "mi250x",
         Vendor::amd,
         {"gnu", "llvm", "cray", "rocm"},
         {
             {"505.lbm", {"2813.46", "43.44", "40.82", "54.64"}},
             {"513.soma", {"BE", "87.98", "BE", "70.05"}},
             {"518.tealeaf", {"337.12", "43.58", "40.41", "48.51"}},
             {"519.clvleaf", {"BE", "BE", "58.73", "72.73"}},
             {"521.miniswp", {"EE", "160.44", "93.59", "142.61"}},
             {"528.pot3d", {"BE", "BE", "45.64", "92.61"}},
             {"532.sph_exa", {"BE", "203.34", "226.33", "207.4"}},
             {"532.sph_exaM", {"BE", "145.61", "164.87", "144.83"}},
             {"534.hpgmgfv", {"BE", "102.32", "87.5", "95.59"}},
             {"535.weather", {"2569.96", "BE", "32.51", "53.19"}},
         }},
    };
    return systems;
}

// OpenACC reference times on Perlmutter with the nvidia toolchain.
inline const std::map<std::string, double>& acc_reference_times() {
    static const std::map<std::string, double> times = {
        {"505.lbm", 28.48},   {"513.soma", 45.82},    {"518.tealeaf", 48.23},
        {"519.clvleaf", 35.69}, {"521.miniswp", 52.38}, {"528.pot3d", 53.58},
        {"532.sph_exa", 129.08}, {"534.hpgmgfv", 64.27}, {"535.weather", 37.23},
    };
    return times;
}

// Per-toolchain mock manifest reproducing one column of the bench table.
inline std::string manifest_for_bench_column(const BenchSystemFixture& sys,
                                             const std::string& toolchain, int n_runs = 3) {
    std::size_t col = 0;
    while (col < sys.toolchains.size() && sys.toolchains[col] != toolchain) ++col;
    if (col == sys.toolchains.size()) throw Error("unknown toolchain column " + toolchain);

    json per_bench = json::object();
    for (const auto& [app, cells] : sys.cells) {
        std::string cell = cells[col];
        json behavior;
        if (cell == "BE") {
            behavior = {{"build", "fail"}};
        } else if (cell == "EE") {
            behavior = {{"build", "ok"}, {"verify", false}, {"run_seconds_sequence", {1.0}}};
        } else {
            double seconds = std::stod(cell);
            json seq = json::array();
            for (int i = 0; i < n_runs; ++i) seq.push_back(seconds);
            behavior = {{"build", "ok"}, {"verify", true}, {"run_seconds_sequence", seq}};
        }
        per_bench[bench_key(app, ModelVariant::TGT)] = behavior;
    }
    json manifest = {{"per_bench", per_bench}};
    return manifest.dump(2) + "\n";
}

// Config for one system's benchmark pipeline: one mock toolchain per
// column, one target, all apps triggered weekly. Manifests are written
// next to `dir`/manifest-<toolchain>.json.
inline std::string write_bench_system_config(const std::string& dir, const BenchSystemFixture& sys) {
    json toolchains = json::array();
    for (const char* tc : sys.toolchains) {
        std::string manifest_path = dir + "/manifest-" + tc + ".json";
        write_file(manifest_path, manifest_for_bench_column(sys, tc));
        toolchains.push_back({{"id", tc},
                              {"c_compiler", manifest_path},
                              {"cxx_compiler", manifest_path},
                              {"fortran_compiler", manifest_path},
                              {"kind", "mock"}});
    }
    json benchmarks = json::array();
    json triggers = json::array();
    for (const BenchFixtureApp& app : bench_apps()) {
        benchmarks.push_back({{"id", app.id},
                              {"language", to_string(app.language)},
                              {"model_variants", {"TGT"}}});
        triggers.push_back({{"suite_or_bench_id", app.id}, {"cadence", "weekly"}});
    }
    json config = {
        {"toolchains", toolchains},
        {"targets", json::array({{{"id", sys.target_id},
                                  {"vendor", to_string(sys.vendor)},
                                  {"accelerator_name", sys.target_id},
                                  {"offload_flags", {"-fopenmp", "--offload"}}}})},
        {"benchmarks", benchmarks},
        {"triggers", triggers},
        {"test_timeout_s", 7200.0},
        {"workspace_dir", dir + "/ws-" + sys.system},
    };
    std::string path = dir + "/config-" + sys.system + ".json";
    write_file(path, config.dump(2) + "\n");
    return path;
}

// ---------------------------------------------------------------------------
// Random DAGs + independent status oracle
// ---------------------------------------------------------------------------

struct RandomDagCase {
    PipelineGraph graph;
    std::map<std::string, JobStatus> planned; // runner outcome if the job runs
};

inline RandomDagCase make_random_dag(std::mt19937& rng, int max_jobs) {
    std::uniform_int_distribution<int> n_dist(1, max_jobs);
    std::uniform_int_distribution<int> stage_dist(0, 3);
    std::bernoulli_distribution dep_dist(0.35);
    std::bernoulli_distribution fail_dist(0.30);

    RandomDagCase out;
    out.graph.pipeline_id = "random";
    int n = n_dist(rng);
    for (int i = 0; i < n; ++i) {
        Job j;
        j.id = "j" + std::to_string(i);
        j.stage = all_stages()[static_cast<std::size_t>(stage_dist(rng))];
        j.kind = JobKind::run_suite;
        out.graph.jobs.push_back(std::move(j));
    }
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            if (out.graph.jobs[static_cast<std::size_t>(k)].stage <
                    out.graph.jobs[static_cast<std::size_t>(i)].stage &&
                dep_dist(rng))
                out.graph.jobs[static_cast<std::size_t>(i)].depends_on.insert(
                    out.graph.jobs[static_cast<std::size_t>(k)].id);
        }
        out.planned[out.graph.jobs[static_cast<std::size_t>(i)].id] =
            fail_dist(rng) ? JobStatus::fail : JobStatus::pass;
    }
    return out;
}

// Reference implementation of the execution status semantics, written as
// the flat inductive definition: walk stages in order; a non-cleanup job
// with any not-passed dependency is skipped, everything else takes its
// planned runner outcome. Cleanup jobs always run.
inline std::map<std::string, JobStatus> oracle_statuses(const PipelineGraph& graph,
                                                        const std::map<std::string, JobStatus>& planned) {
    std::map<std::string, JobStatus> actual;
    for (Stage stage : all_stages()) {
        for (const Job& j : graph.jobs) {
            if (j.stage != stage) continue;
            bool blocked = false;
            if (j.stage != Stage::cleanup) {
                for (const std::string& dep : j.depends_on)
                    if (actual.at(dep) != JobStatus::pass) blocked = true;
            }
            actual[j.id] = blocked ? JobStatus::skipped : planned.at(j.id);
        }
    }
    return actual;
}

// True when some transitive dependency of `job` actually failed.
inline bool has_failed_transitive_dep(const PipelineGraph& graph, const std::string& job_id,
                                      const std::map<std::string, JobStatus>& actual) {
    std::vector<std::string> frontier{job_id};
    std::set<std::string> seen;
    while (!frontier.empty()) {
        std::string id = frontier.back();
        frontier.pop_back();
        const Job* j = graph.find_job(id);
        if (!j) continue;
        for (const std::string& dep : j->depends_on) {
            if (!seen.insert(dep).second) continue;
            if (actual.at(dep) == JobStatus::fail) return true;
            frontier.push_back(dep);
        }
    }
    return false;
}

inline JobRunner planned_runner(const std::map<std::string, JobStatus>& planned) {
    return [&planned](const Job& job) -> JobOutcome {
        return {planned.at(job.id), ""};
    };
}

// ---------------------------------------------------------------------------
// CLI driver
// ---------------------------------------------------------------------------

#ifdef OMPFORGE_CLI_PATH
inline ProcessResult run_cli(const std::vector<std::string>& args, double timeout_s = 60.0) {
    std::vector<std::string> argv{OMPFORGE_CLI_PATH};
    argv.insert(argv.end(), args.begin(), args.end());
    return run_argv(argv, timeout_s);
}
#endif

} // namespace fixtures
