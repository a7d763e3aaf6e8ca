#pragma once

#include "ompforge/config.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/mock.hpp"
#include "ompforge/subprocess.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace ompforge {

enum class SpecVersion { v45, v50, v51, v52, unknown };

inline const char* to_string(SpecVersion v) {
    switch (v) {
    case SpecVersion::v45: return "4.5";
    case SpecVersion::v50: return "5.0";
    case SpecVersion::v51: return "5.1";
    case SpecVersion::v52: return "5.2";
    case SpecVersion::unknown: return "unknown";
    }
    return "?";
}

inline SpecVersion spec_version_from_string(const std::string& s) {
    if (s == "4.5") return SpecVersion::v45;
    if (s == "5.0") return SpecVersion::v50;
    if (s == "5.1") return SpecVersion::v51;
    if (s == "5.2") return SpecVersion::v52;
    return SpecVersion::unknown;
}

// The four versions conformance tables report on, in row order.
inline const std::array<SpecVersion, 4>& known_spec_versions() {
    static const std::array<SpecVersion, 4> v = {SpecVersion::v45, SpecVersion::v50,
                                                 SpecVersion::v51, SpecVersion::v52};
    return v;
}

enum class PhaseResult { pass, compile_fail, runtime_fail, wrong_answer, timeout };

inline const char* to_string(PhaseResult r) {
    switch (r) {
    case PhaseResult::pass: return "pass";
    case PhaseResult::compile_fail: return "compile_fail";
    case PhaseResult::runtime_fail: return "runtime_fail";
    case PhaseResult::wrong_answer: return "wrong_answer";
    case PhaseResult::timeout: return "timeout";
    }
    return "?";
}

inline PhaseResult phase_result_from_string(const std::string& s) {
    for (PhaseResult r : {PhaseResult::pass, PhaseResult::compile_fail, PhaseResult::runtime_fail,
                          PhaseResult::wrong_answer, PhaseResult::timeout})
        if (s == to_string(r)) return r;
    throw SchemaError("unknown phase_result '" + s + "'");
}

// One conformance test: where it lives, which spec revision introduced the
// feature it exercises, and which language front end it needs.
struct TestCase {
    std::string suite_id;
    std::string rel_path;
    SpecVersion spec_version = SpecVersion::unknown;
    Language language = Language::C;
    std::string name; // filename stem

    bool operator==(const TestCase&) const = default;
};

struct TestOutcome {
    TestCase test;
    std::string toolchain_id;
    std::string target_id;
    PhaseResult phase_result = PhaseResult::pass;
    double compile_seconds = 0.0;
    double run_seconds = 0.0; // 0 if the binary never ran
    std::string diagnostics;  // truncated to 64 KiB

    bool operator==(const TestOutcome&) const = default;
};

inline constexpr std::size_t kDiagnosticsCap = 64 * 1024;

inline std::string truncate_diagnostics(std::string text) {
    if (text.size() > kDiagnosticsCap) text.resize(kDiagnosticsCap);
    return text;
}

// ---------------------------------------------------------------------------
// Classification and discovery
// ---------------------------------------------------------------------------

inline std::optional<Language> language_from_extension(const std::string& rel_path) {
    auto dot = rel_path.find_last_of('.');
    if (dot == std::string::npos) return std::nullopt;
    std::string ext = rel_path.substr(dot);
    if (ext == ".c") return Language::C;
    if (ext == ".cpp") return Language::Cxx;
    if (ext == ".F90" || ext == ".f90") return Language::Fortran;
    return std::nullopt;
}

// Pure classification. Language comes from the extension alone; the spec
// version comes from the first path segment under the suite root, and only
// for versioned suites. Anything else is `unknown`.
inline std::pair<SpecVersion, Language> classify_test(const std::string& rel_path,
                                                      SuiteKind suite_kind) {
    auto lang = language_from_extension(rel_path);
    if (!lang) throw UnsupportedExtension("unrecognized test extension: '" + rel_path + "'");
    SpecVersion version = SpecVersion::unknown;
    if (suite_kind == SuiteKind::versioned_conformance) {
        auto slash = rel_path.find('/');
        if (slash != std::string::npos) version = spec_version_from_string(rel_path.substr(0, slash));
    }
    return {version, *lang};
}

// Walk the suite tree and classify every file with a recognized extension.
// Output is sorted by (spec_version, rel_path).
inline std::vector<TestCase> discover_tests(const SuiteSpec& suite) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(suite.root, ec))
        throw IoError("suite root is not a readable directory: '" + suite.root + "'");

    std::vector<TestCase> tests;
    fs::recursive_directory_iterator it(suite.root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw IoError("cannot read suite root '" + suite.root + "': " + ec.message());
    for (const auto& entry : it) {
        if (!entry.is_regular_file(ec)) continue;
        std::string rel = fs::relative(entry.path(), suite.root).generic_string();
        auto lang = language_from_extension(rel);
        if (!lang) continue;
        auto [version, language] = classify_test(rel, suite.kind);
        TestCase tc;
        tc.suite_id = suite.id;
        tc.rel_path = rel;
        tc.spec_version = version;
        tc.language = language;
        tc.name = entry.path().stem().string();
        tests.push_back(std::move(tc));
    }
    std::sort(tests.begin(), tests.end(), [](const TestCase& a, const TestCase& b) {
        return std::tie(a.spec_version, a.rel_path) < std::tie(b.spec_version, b.rel_path);
    });
    return tests;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

// Optional knobs for run_test. `work_dir` gets compile.log/run.log and the
// built binary when set; `manifest` skips re-reading the mock manifest when
// the caller already loaded it.
struct RunTestOptions {
    std::string work_dir;
    std::string suite_root;                 // where rel_path resolves from (real toolchains)
    const MockManifest* manifest = nullptr; // preloaded manifest for kind=mock
};

namespace detail {

inline const std::string& compiler_for(const ToolchainSpec& tc, Language lang) {
    switch (lang) {
    case Language::C: return tc.c_compiler;
    case Language::Cxx: return tc.cxx_compiler;
    case Language::Fortran:
        if (!tc.fortran_compiler)
            throw ToolchainUnavailable("toolchain '" + tc.id + "' has no Fortran compiler");
        return *tc.fortran_compiler;
    }
    throw ToolchainUnavailable("unsupported language");
}

inline void write_log(const std::string& work_dir, const char* name, const std::string& text) {
    if (work_dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(work_dir, ec);
    std::ofstream out(work_dir + "/" + name, std::ios::trunc);
    out << text;
}

inline PhaseResult band_run_exit(int exit_code) {
    if (exit_code == 0) return PhaseResult::pass;
    if (exit_code >= 1 && exit_code <= 124) return PhaseResult::wrong_answer;
    return PhaseResult::runtime_fail; // >= 125 or signal death
}

} // namespace detail

// Compile-then-run one test against a toolchain×target. Phase 1 failure
// short-circuits: a compile_fail outcome never reports run time. Run exits
// land in bands: 0 pass, 1..124 wrong_answer (self-reported error counts),
// >=125 or a signal runtime_fail, wall clock past timeout_s is a timeout.
inline TestOutcome run_test(const TestCase& test, const ToolchainSpec& tc, const TargetSpec& tgt,
                            double timeout_s, const RunTestOptions& opts = {}) {
    TestOutcome out;
    out.test = test;
    out.toolchain_id = tc.id;
    out.target_id = tgt.id;

    MockManifest local_manifest;
    const MockManifest* manifest = opts.manifest;
    if (tc.kind == ToolchainKind::mock && !manifest) {
        local_manifest = load_manifest_file(tc.c_compiler);
        manifest = &local_manifest;
    }

    // Phase 1: compile.
    std::string compile_output;
    double compile_seconds = 0.0;
    bool compile_ok = false;
    bool compile_timed_out = false;
    if (tc.kind == ToolchainKind::mock) {
        SimulatedProcess p = mock_invoke(*manifest, MockRole::compile, test.name);
        compile_output = p.output;
        compile_seconds = p.seconds;
        compile_ok = p.exit_code == 0;
    } else {
        const std::string& compiler = detail::compiler_for(tc, test.language);
        if (!executable_available(compiler))
            throw ToolchainUnavailable("compiler not found: '" + compiler + "'");
        std::string src = opts.suite_root.empty() ? test.rel_path : opts.suite_root + "/" + test.rel_path;
        std::string bin = opts.work_dir.empty() ? "/tmp/ompforge-" + test.name + ".bin"
                                                : opts.work_dir + "/binary";
        if (!opts.work_dir.empty()) {
            std::error_code ec;
            std::filesystem::create_directories(opts.work_dir, ec);
        }
        std::vector<std::string> argv{compiler, src, "-o", bin};
        argv.insert(argv.end(), tgt.offload_flags.begin(), tgt.offload_flags.end());
        if (auto it = tc.extra_flags.find(tgt.id); it != tc.extra_flags.end())
            argv.insert(argv.end(), it->second.begin(), it->second.end());
        ProcessResult p = run_argv(argv, timeout_s);
        compile_output = p.output;
        compile_seconds = p.seconds;
        compile_ok = !p.timed_out && p.exit_code == 0;
        compile_timed_out = p.timed_out;
    }
    detail::write_log(opts.work_dir, "compile.log", compile_output);
    out.compile_seconds = compile_seconds;
    if (!compile_ok) {
        out.phase_result = PhaseResult::compile_fail;
        out.run_seconds = 0.0;
        out.diagnostics =
            truncate_diagnostics(compile_timed_out ? "compile timeout\n" + compile_output : compile_output);
        return out;
    }

    // Phase 2: run.
    std::string run_output;
    if (tc.kind == ToolchainKind::mock) {
        SimulatedProcess p = mock_invoke(*manifest, MockRole::run, test.name);
        run_output = p.output;
        out.run_seconds = p.seconds;
        out.phase_result =
            p.seconds > timeout_s ? PhaseResult::timeout : detail::band_run_exit(p.exit_code);
    } else {
        std::string bin = opts.work_dir.empty() ? "/tmp/ompforge-" + test.name + ".bin"
                                                : opts.work_dir + "/binary";
        ProcessResult p = run_argv({bin}, timeout_s);
        run_output = p.output;
        out.run_seconds = p.seconds;
        out.phase_result = p.timed_out ? PhaseResult::timeout : detail::band_run_exit(p.exit_code);
    }
    detail::write_log(opts.work_dir, "run.log", run_output);
    out.diagnostics = truncate_diagnostics(run_output);
    return out;
}

// Options for run_suite. `green` restricts execution to names on the green
// list (tests not on it are omitted from the output entirely); the overload
// taking a GreenRedList in greenlist.hpp fills this in.
struct RunSuiteOptions {
    const std::set<std::string>* green = nullptr;
    std::string work_root; // per-test work dirs are created under here
    std::string suite_root;
    const MockManifest* manifest = nullptr;
};

// Execute tests in input order. Tests whose language the toolchain cannot
// compile are skipped silently rather than erroring; per-test failures of
// the harness itself degrade to runtime_fail outcomes with diagnostics.
inline std::vector<TestOutcome> run_suite(const std::vector<TestCase>& tests,
                                          const ToolchainSpec& tc, const TargetSpec& tgt,
                                          double timeout_s, const RunSuiteOptions& opts = {}) {
    MockManifest local_manifest;
    const MockManifest* manifest = opts.manifest;
    if (tc.kind == ToolchainKind::mock && !manifest) {
        local_manifest = load_manifest_file(tc.c_compiler);
        manifest = &local_manifest;
    }
    std::vector<TestOutcome> outcomes;
    outcomes.reserve(tests.size());
    for (const TestCase& test : tests) {
        if (opts.green && !opts.green->count(test.name)) continue;
        if (!tc.supports(test.language)) continue;
        RunTestOptions ro;
        ro.suite_root = opts.suite_root;
        ro.manifest = manifest;
        if (!opts.work_root.empty()) ro.work_dir = opts.work_root + "/" + test.name;
        try {
            outcomes.push_back(run_test(test, tc, tgt, timeout_s, ro));
        } catch (const Error& e) {
            TestOutcome out;
            out.test = test;
            out.toolchain_id = tc.id;
            out.target_id = tgt.id;
            out.phase_result = PhaseResult::runtime_fail;
            out.diagnostics = truncate_diagnostics(std::string("harness error: ") + e.what());
            outcomes.push_back(std::move(out));
        }
    }
    return outcomes;
}

// Job-level pass criterion: every executed outcome passed.
inline bool all_pass(const std::vector<TestOutcome>& outcomes) {
    return std::all_of(outcomes.begin(), outcomes.end(),
                       [](const TestOutcome& o) { return o.phase_result == PhaseResult::pass; });
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline json to_json(const TestCase& t) {
    return json{{"suite_id", t.suite_id},
                {"rel_path", t.rel_path},
                {"spec_version", to_string(t.spec_version)},
                {"language", to_string(t.language)},
                {"name", t.name}};
}

inline TestCase test_case_from_json(const json& j) {
    TestCase t;
    t.suite_id = j.at("suite_id").get<std::string>();
    t.rel_path = j.at("rel_path").get<std::string>();
    t.spec_version = spec_version_from_string(j.at("spec_version").get<std::string>());
    t.language = language_from_string(j.at("language").get<std::string>());
    t.name = j.at("name").get<std::string>();
    return t;
}

inline json to_json(const TestOutcome& o) {
    json j = to_json(o.test);
    j["toolchain_id"] = o.toolchain_id;
    j["target_id"] = o.target_id;
    j["phase_result"] = to_string(o.phase_result);
    j["compile_seconds"] = o.compile_seconds;
    j["run_seconds"] = o.run_seconds;
    j["diagnostics"] = o.diagnostics;
    return j;
}

inline TestOutcome test_outcome_from_json(const json& j) {
    TestOutcome o;
    o.test = test_case_from_json(j);
    o.toolchain_id = j.at("toolchain_id").get<std::string>();
    o.target_id = j.at("target_id").get<std::string>();
    o.phase_result = phase_result_from_string(j.at("phase_result").get<std::string>());
    o.compile_seconds = j.at("compile_seconds").get<double>();
    o.run_seconds = j.at("run_seconds").get<double>();
    o.diagnostics = j.value("diagnostics", "");
    return o;
}

} // namespace ompforge
