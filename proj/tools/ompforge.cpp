// ompforge — batch driver for toolchain validation pipelines.
//
// Subcommands: plan, run, greenlist gen|diff, report. Exit codes:
//   0 success, 1 pipeline/test failures or regressions present,
//   2 usage or configuration error, 3 internal error.

#include "ompforge/ompforge.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

using namespace ompforge;

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitFailures = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

std::string workspace_from_env() {
    const char* ws = std::getenv("OMPFORGE_WORKSPACE");
    return ws ? ws : "";
}

Config load_config_checked(const std::string& path, bool print_issues = true) {
    Config cfg = parse_config(read_text_file(path));
    if (std::string env_ws = workspace_from_env(); !env_ws.empty()) cfg.workspace_dir = env_ws;
    std::vector<ValidationIssue> issues = validate_config(cfg);
    for (const auto& issue : issues) {
        if (print_issues)
            std::cerr << to_string(issue.severity) << ": " << issue.path << ": " << issue.message
                      << "\n";
    }
    if (has_errors(issues)) throw SchemaError("configuration has validation errors");
    return cfg;
}

std::unique_ptr<Clock> make_clock(const std::string& clock_at) {
    if (clock_at.empty()) return std::make_unique<SystemClock>();
    return std::make_unique<FixedClock>(parse_iso8601(clock_at));
}

struct ScopeKey {
    std::string toolchain, target, suite;
};

std::optional<ScopeKey> parse_scope(const std::string& text) {
    auto a = text.find(':');
    auto b = text.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) return std::nullopt;
    return ScopeKey{text.substr(0, a), text.substr(a + 1, b - a - 1), text.substr(b + 1)};
}

int cmd_plan(const std::string& config_path, const std::string& cadence_name,
             const std::string& clock_at) {
    Config cfg = load_config_checked(config_path);
    auto clock = make_clock(clock_at);
    PipelineGraph graph = plan_pipeline(cfg, cadence_from_string(cadence_name), clock->now());
    auto counts = job_counts_by_stage(graph);
    std::cout << "pipeline " << graph.pipeline_id << "\n";
    bool first = true;
    for (Stage s : all_stages()) {
        std::cout << (first ? "" : ", ") << to_string(s) << ": " << counts[s];
        first = false;
    }
    std::cout << "\n";
    for (const Job& j : graph.jobs) std::cout << "  [" << to_string(j.stage) << "] " << j.id << "\n";
    return kExitSuccess;
}

int cmd_run(const std::string& config_path, const std::string& cadence_name, int parallelism,
            const std::string& out, const std::string& system_label, const std::string& clock_at,
            int bench_runs, const std::string& greenlist_dir) {
    Config cfg = load_config_checked(config_path);
    auto clock = make_clock(clock_at);
    RunOptions opts;
    opts.system_label = system_label;
    opts.parallelism = parallelism;
    opts.bench_runs = bench_runs;
    opts.snapshot_out = out;
    opts.greenlist_dir = greenlist_dir;
    opts.clock = clock.get();
    RunArtifacts art = run_configured_pipeline(cfg, cadence_from_string(cadence_name), opts);

    for (const JobResult& r : art.result.job_results) {
        const char* mark = r.status == JobStatus::pass ? "PASS"
                           : r.status == JobStatus::fail ? "FAIL"
                                                         : "SKIP";
        std::cout << "[" << mark << "] " << r.job_id;
        if (!r.detail.empty()) std::cout << " — " << r.detail;
        std::cout << "\n";
    }
    for (const auto& [stage, status] : art.result.stage_status)
        std::cout << "stage " << to_string(stage) << ": " << to_string(status) << "\n";
    std::cout << "overall: " << to_string(art.result.overall) << "\n";
    std::cout << "pipeline result: " << art.pipeline_file << "\n";
    std::cout << "snapshot: " << art.snapshot_file << "\n";
    return art.result.overall == StageStatus::pass ? kExitSuccess : kExitFailures;
}

int cmd_greenlist_gen(const std::string& snapshot_path, const std::string& out_dir,
                      const std::string& scope_text, const std::string& clock_at) {
    ResultsSnapshot snap = snapshot_from_json(json::parse(read_text_file(snapshot_path)));
    auto clock = make_clock(clock_at);
    std::optional<ScopeKey> scope;
    if (!scope_text.empty()) {
        scope = parse_scope(scope_text);
        if (!scope) {
            std::cerr << "error: --scope must be <toolchain>:<target>:<suite>\n";
            return kExitUsage;
        }
    }

    std::map<std::tuple<std::string, std::string, std::string>, std::vector<TestOutcome>> by_scope;
    for (const TestOutcome& o : snap.outcomes)
        by_scope[{o.toolchain_id, o.target_id, o.test.suite_id}].push_back(o);
    if (by_scope.empty()) {
        std::cerr << "error: snapshot contains no test outcomes\n";
        return kExitUsage;
    }

    std::string dir = !out_dir.empty()           ? out_dir
                      : !workspace_from_env().empty() ? workspace_from_env()
                                                      : ".";
    int written = 0;
    for (auto& [key, outcomes] : by_scope) {
        const auto& [tc, tgt, suite] = key;
        if (scope && (tc != scope->toolchain || tgt != scope->target || suite != scope->suite))
            continue;
        std::string pin;
        if (auto it = snap.commit_pins.find(suite); it != snap.commit_pins.end()) pin = it->second;
        GreenRedList list = build_lists(outcomes, pin, clock->now());
        std::string path = dir + "/" + green_list_filename(list);
        write_text_file(path, to_json(list).dump(2) + "\n");
        std::cout << path << ": " << list.green.size() << " green, " << list.red.size() << " red\n";
        ++written;
    }
    if (written == 0) {
        std::cerr << "error: no outcomes matched scope '" << scope_text << "'\n";
        return kExitUsage;
    }
    return kExitSuccess;
}

int cmd_greenlist_diff(const std::string& baseline_path, const std::string& snapshot_path,
                       const std::string& out) {
    GreenRedList baseline = green_red_list_from_json(json::parse(read_text_file(baseline_path)));
    ResultsSnapshot snap = snapshot_from_json(json::parse(read_text_file(snapshot_path)));
    std::vector<TestOutcome> scoped;
    for (const TestOutcome& o : snap.outcomes)
        if (o.toolchain_id == baseline.toolchain_id && o.target_id == baseline.target_id &&
            o.test.suite_id == baseline.suite_id)
            scoped.push_back(o);
    if (scoped.empty())
        throw ScopeMismatch("snapshot has no outcomes for scope (" + baseline.toolchain_id + ", " +
                            baseline.target_id + ", " + baseline.suite_id + ")");

    RegressionReport report = diff_results(baseline, scoped);
    std::string path = out.empty() ? "regressions-" + report.toolchain_id + "-" + report.target_id +
                                         "-" + report.suite_id + ".json"
                                   : out;
    write_text_file(path, to_json(report).dump(2) + "\n");

    std::cout << report.regressions.size() << " regressions, " << report.promotions.size()
              << " promotions (" << report.unchanged_green << " still green, "
              << report.unchanged_red << " still red)\n";
    for (const auto& name : report.regressions) std::cout << "  regression: " << name << "\n";
    for (const auto& name : report.promotions) std::cout << "  promotion: " << name << "\n";
    std::cout << "report: " << path << "\n";
    return report.regressions.empty() ? kExitSuccess : kExitFailures;
}

int cmd_report(const std::vector<std::string>& snapshot_paths, const std::string& shape,
               const std::string& format_name, const std::string& out) {
    ReportFormat format = report_format_from_string(format_name);
    std::vector<ResultsSnapshot> snaps;
    for (const auto& path : snapshot_paths)
        snaps.push_back(snapshot_from_json(json::parse(read_text_file(path))));

    std::string rendered;
    if (shape == "version-matrix") {
        if (format == ReportFormat::json) {
            json j{{"c_and_cxx", to_json(aggregate_by_version(snaps, LanguageGroup::C_and_CXX))},
                   {"fortran", to_json(aggregate_by_version(snaps, LanguageGroup::Fortran))}};
            rendered = j.dump(2) + "\n";
        } else {
            for (LanguageGroup g : {LanguageGroup::C_and_CXX, LanguageGroup::Fortran}) {
                VersionMatrix m = aggregate_by_version(snaps, g);
                if (format == ReportFormat::markdown)
                    rendered += std::string("## ") + display_label(g) + "\n\n";
                else if (!rendered.empty())
                    rendered += "\n";
                rendered += render(m, format);
                if (format == ReportFormat::markdown) rendered += "\n";
            }
        }
    } else if (shape == "totals") {
        std::vector<LanguageTotals> totals;
        for (const auto& snap : snaps)
            for (auto& t : totals_by_language(snap)) totals.push_back(std::move(t));
        rendered = render(totals, format);
    } else if (shape == "evolution") {
        rendered = render(evolution_series(snaps), format);
    } else if (shape == "bench") {
        rendered = render(bench_table(snaps), format);
    } else {
        std::cerr << "error: unknown shape '" << shape
                  << "' (expected version-matrix, totals, evolution, or bench)\n";
        return kExitUsage;
    }

    std::string path = out;
    if (path.empty()) {
        std::string ws = workspace_from_env();
        path = (ws.empty() ? std::string("reports") : ws + "/reports") + "/" + shape + "." +
               file_extension(format);
    }
    write_text_file(path, rendered);
    std::cout << "report: " << path << "\n";
    return kExitSuccess;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Toolchain validation, verification, and benchmarking pipelines"};
    app.require_subcommand(1);

    std::string config_path, cadence = "hourly", out, system_label = "local", clock_at;
    std::string snapshot_path, baseline_path, out_dir, scope, shape, format_name = "markdown";
    std::string greenlist_dir;
    std::vector<std::string> snapshot_paths;
    int parallelism = 0, bench_runs = 3;

    CLI::App* plan = app.add_subcommand("plan", "Plan the job graph for a cadence");
    plan->add_option("config", config_path, "config JSON path")->required();
    plan->add_option("--cadence", cadence, "hourly, weekly, or manual");
    plan->add_option("--clock", clock_at, "fixed ISO-8601 UTC timestamp");

    CLI::App* run = app.add_subcommand("run", "Plan and execute a pipeline");
    run->add_option("config", config_path, "config JSON path")->required();
    run->add_option("--cadence", cadence, "hourly, weekly, or manual");
    run->add_option("--parallelism", parallelism, "override job parallelism");
    run->add_option("--out", out, "snapshot output path");
    run->add_option("--system-label", system_label, "system name recorded in the snapshot");
    run->add_option("--clock", clock_at, "fixed ISO-8601 UTC timestamp");
    run->add_option("--runs", bench_runs, "benchmark repetitions (odd)");
    run->add_option("--greenlists", greenlist_dir, "directory of green lists to filter by");

    CLI::App* greenlist = app.add_subcommand("greenlist", "Manage expected-outcome lists");
    greenlist->require_subcommand(1);
    CLI::App* gen = greenlist->add_subcommand("gen", "Build green/red lists from a snapshot");
    gen->add_option("snapshot", snapshot_path, "snapshot JSON path")->required();
    gen->add_option("--out-dir", out_dir, "directory for list files");
    gen->add_option("--scope", scope, "restrict to <toolchain>:<target>:<suite>");
    gen->add_option("--clock", clock_at, "fixed ISO-8601 UTC timestamp");
    CLI::App* diff = greenlist->add_subcommand("diff", "Diff a snapshot against a baseline list");
    diff->add_option("--baseline", baseline_path, "baseline green list JSON")->required();
    diff->add_option("--snapshot", snapshot_path, "new snapshot JSON")->required();
    diff->add_option("--out", out, "regression report output path");

    CLI::App* report = app.add_subcommand("report", "Render aggregated reports");
    report->add_option("--snapshot", snapshot_paths, "snapshot JSON path(s)")->required();
    report->add_option("--shape", shape, "version-matrix, totals, evolution, or bench")->required();
    report->add_option("--format", format_name, "json, csv, or markdown");
    report->add_option("--out", out, "report output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitSuccess : kExitUsage;
    }

    try {
        if (plan->parsed()) return cmd_plan(config_path, cadence, clock_at);
        if (run->parsed())
            return cmd_run(config_path, cadence, parallelism, out, system_label, clock_at,
                           bench_runs, greenlist_dir);
        if (gen->parsed()) return cmd_greenlist_gen(snapshot_path, out_dir, scope, clock_at);
        if (diff->parsed()) return cmd_greenlist_diff(baseline_path, snapshot_path, out);
        if (report->parsed()) return cmd_report(snapshot_paths, shape, format_name, out);
    } catch (const SyntaxError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const PlanError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ScopeMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
