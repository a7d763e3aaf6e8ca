#pragma once

#include "ompforge/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ompforge {

using json = nlohmann::json;

enum class Language { C, Cxx, Fortran };
enum class ToolchainKind { real, mock };
enum class Vendor { nvidia, amd, intel, host };
enum class SuiteKind { versioned_conformance, flat_application };
enum class Cadence { hourly, weekly, manual };
enum class ModelVariant { TGT, ACC };
enum class OutputCheck { exit_code_only, golden_file };

inline const char* to_string(Language v) {
    switch (v) {
    case Language::C: return "C";
    case Language::Cxx: return "C++";
    case Language::Fortran: return "Fortran";
    }
    return "?";
}
inline const char* to_string(ToolchainKind v) { return v == ToolchainKind::real ? "real" : "mock"; }
inline const char* to_string(Vendor v) {
    switch (v) {
    case Vendor::nvidia: return "nvidia";
    case Vendor::amd: return "amd";
    case Vendor::intel: return "intel";
    case Vendor::host: return "host";
    }
    return "?";
}
inline const char* to_string(SuiteKind v) {
    return v == SuiteKind::versioned_conformance ? "versioned_conformance" : "flat_application";
}
inline const char* to_string(Cadence v) {
    switch (v) {
    case Cadence::hourly: return "hourly";
    case Cadence::weekly: return "weekly";
    case Cadence::manual: return "manual";
    }
    return "?";
}
inline const char* to_string(ModelVariant v) { return v == ModelVariant::TGT ? "TGT" : "ACC"; }
inline const char* to_string(OutputCheck v) {
    return v == OutputCheck::exit_code_only ? "exit_code_only" : "golden_file";
}

namespace detail {

template <typename Enum>
inline Enum enum_from_string(const std::string& text, std::initializer_list<Enum> values,
                             const std::string& path) {
    for (Enum v : values)
        if (text == to_string(v)) return v;
    std::string allowed;
    for (Enum v : values) {
        if (!allowed.empty()) allowed += ", ";
        allowed += to_string(v);
    }
    throw SchemaError(path + ": unknown value '" + text + "' (expected one of: " + allowed + ")");
}

} // namespace detail

inline Language language_from_string(const std::string& s, const std::string& path = "language") {
    return detail::enum_from_string(s, {Language::C, Language::Cxx, Language::Fortran}, path);
}
inline Cadence cadence_from_string(const std::string& s, const std::string& path = "cadence") {
    return detail::enum_from_string(s, {Cadence::hourly, Cadence::weekly, Cadence::manual}, path);
}
inline ModelVariant variant_from_string(const std::string& s, const std::string& path = "variant") {
    return detail::enum_from_string(s, {ModelVariant::TGT, ModelVariant::ACC}, path);
}

// A compiler family under test. For kind=mock the compiler fields hold the
// path of the behavior manifest instead of real driver executables.
struct ToolchainSpec {
    std::string id;
    std::string display_name;
    std::string c_compiler;
    std::string cxx_compiler;
    std::optional<std::string> fortran_compiler;
    std::vector<std::string> version_probe_args;
    std::map<std::string, std::vector<std::string>> extra_flags; // target id -> flags
    ToolchainKind kind = ToolchainKind::real;

    bool supports(Language lang) const {
        return lang != Language::Fortran || fortran_compiler.has_value();
    }
    bool operator==(const ToolchainSpec&) const = default;
};

struct TargetSpec {
    std::string id;
    Vendor vendor = Vendor::host;
    std::string accelerator_name;
    std::vector<std::string> offload_flags;

    bool operator==(const TargetSpec&) const = default;
};

struct SuiteSpec {
    std::string id;
    SuiteKind kind = SuiteKind::versioned_conformance;
    std::string root;
    std::string pinned_commit; // opaque pin, recorded verbatim in snapshots
    std::set<Language> languages = {Language::C, Language::Cxx, Language::Fortran};

    bool operator==(const SuiteSpec&) const = default;
};

struct TriggerSpec {
    std::string suite_or_bench_id;
    Cadence cadence = Cadence::manual;

    bool operator==(const TriggerSpec&) const = default;
};

// One benchmark application cell source. Command templates expand the
// placeholders {cc} {cxx} {fc} {flags} {src} {out}.
struct BenchApp {
    std::string id;
    std::string display_name;
    Language language = Language::C;
    std::set<ModelVariant> model_variants;
    std::string source_dir;
    std::string build_command_template;
    std::string run_command_template;
    OutputCheck expected_output_check = OutputCheck::exit_code_only;

    bool operator==(const BenchApp&) const = default;
};

struct Config {
    std::vector<ToolchainSpec> toolchains;
    std::vector<TargetSpec> targets;
    std::vector<SuiteSpec> suites;
    std::vector<BenchApp> benchmarks;
    std::vector<TriggerSpec> triggers;
    int job_parallelism = 4;
    double test_timeout_s = 120.0;
    std::string workspace_dir = "ompforge-workspace";

    const ToolchainSpec* find_toolchain(const std::string& id) const {
        for (const auto& t : toolchains)
            if (t.id == id) return &t;
        return nullptr;
    }
    const TargetSpec* find_target(const std::string& id) const {
        for (const auto& t : targets)
            if (t.id == id) return &t;
        return nullptr;
    }
    const SuiteSpec* find_suite(const std::string& id) const {
        for (const auto& s : suites)
            if (s.id == id) return &s;
        return nullptr;
    }
    const BenchApp* find_benchmark(const std::string& id) const {
        for (const auto& b : benchmarks)
            if (b.id == id) return &b;
        return nullptr;
    }

    bool operator==(const Config&) const = default;
};

enum class Severity { error, warning };

inline const char* to_string(Severity s) { return s == Severity::error ? "error" : "warning"; }

struct ValidationIssue {
    Severity severity = Severity::error;
    std::string path;    // id-based, e.g. "triggers[specfp]" — stable under reordering
    std::string message;

    bool operator==(const ValidationIssue&) const = default;
    bool operator<(const ValidationIssue& o) const {
        if (path != o.path) return path < o.path;
        if (severity != o.severity) return severity < o.severity;
        return message < o.message;
    }
};

// ---------------------------------------------------------------------------
// Strict JSON helpers
// ---------------------------------------------------------------------------

namespace detail {

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw SchemaError(path + ": unknown key '" + it.key() + "'");
    }
}

inline const json* get_field(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

inline std::string need_string(const json& obj, const char* key, const std::string& path) {
    const json* f = get_field(obj, key);
    if (!f) throw SchemaError(path + ": missing required key '" + key + "'");
    if (!f->is_string()) throw SchemaError(path + "." + key + ": expected a string");
    return f->get<std::string>();
}

inline std::string opt_string(const json& obj, const char* key, const std::string& path,
                              std::string fallback) {
    const json* f = get_field(obj, key);
    if (!f) return fallback;
    if (!f->is_string()) throw SchemaError(path + "." + key + ": expected a string");
    return f->get<std::string>();
}

inline std::vector<std::string> opt_string_list(const json& obj, const char* key,
                                                const std::string& path) {
    const json* f = get_field(obj, key);
    if (!f) return {};
    if (!f->is_array()) throw SchemaError(path + "." + key + ": expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : *f) {
        if (!e.is_string()) throw SchemaError(path + "." + key + ": expected an array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

inline void syntax_error_at(const std::string& text, std::size_t byte, const std::string& what) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    throw SyntaxError("parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + what);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

inline ToolchainSpec parse_toolchain(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw SchemaError(path + ": expected an object");
    detail::check_keys(obj,
                       {"id", "display_name", "c_compiler", "cxx_compiler", "fortran_compiler",
                        "version_probe_args", "extra_flags", "kind"},
                       path);
    ToolchainSpec tc;
    tc.id = detail::need_string(obj, "id", path);
    tc.display_name = detail::opt_string(obj, "display_name", path, tc.id);
    tc.c_compiler = detail::need_string(obj, "c_compiler", path);
    tc.cxx_compiler = detail::need_string(obj, "cxx_compiler", path);
    if (const json* f = detail::get_field(obj, "fortran_compiler")) {
        if (!f->is_string()) throw SchemaError(path + ".fortran_compiler: expected a string");
        tc.fortran_compiler = f->get<std::string>();
    }
    tc.version_probe_args = detail::opt_string_list(obj, "version_probe_args", path);
    if (const json* f = detail::get_field(obj, "extra_flags")) {
        if (!f->is_object()) throw SchemaError(path + ".extra_flags: expected an object");
        for (auto it = f->begin(); it != f->end(); ++it) {
            if (!it.value().is_array())
                throw SchemaError(path + ".extra_flags." + it.key() + ": expected an array of strings");
            std::vector<std::string> flags;
            for (const auto& e : it.value()) {
                if (!e.is_string())
                    throw SchemaError(path + ".extra_flags." + it.key() +
                                      ": expected an array of strings");
                flags.push_back(e.get<std::string>());
            }
            tc.extra_flags[it.key()] = std::move(flags);
        }
    }
    tc.kind = detail::enum_from_string(detail::opt_string(obj, "kind", path, "real"),
                                       {ToolchainKind::real, ToolchainKind::mock}, path + ".kind");
    return tc;
}

inline TargetSpec parse_target(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw SchemaError(path + ": expected an object");
    detail::check_keys(obj, {"id", "vendor", "accelerator_name", "offload_flags"}, path);
    TargetSpec t;
    t.id = detail::need_string(obj, "id", path);
    t.vendor =
        detail::enum_from_string(detail::need_string(obj, "vendor", path),
                                 {Vendor::nvidia, Vendor::amd, Vendor::intel, Vendor::host},
                                 path + ".vendor");
    t.accelerator_name = detail::opt_string(obj, "accelerator_name", path, t.id);
    t.offload_flags = detail::opt_string_list(obj, "offload_flags", path);
    return t;
}

inline SuiteSpec parse_suite(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw SchemaError(path + ": expected an object");
    detail::check_keys(obj, {"id", "kind", "root", "pinned_commit", "languages"}, path);
    SuiteSpec s;
    s.id = detail::need_string(obj, "id", path);
    s.kind = detail::enum_from_string(
        detail::opt_string(obj, "kind", path, "versioned_conformance"),
        {SuiteKind::versioned_conformance, SuiteKind::flat_application}, path + ".kind");
    s.root = detail::need_string(obj, "root", path);
    s.pinned_commit = detail::need_string(obj, "pinned_commit", path);
    if (detail::get_field(obj, "languages")) {
        s.languages.clear();
        for (const auto& l : detail::opt_string_list(obj, "languages", path))
            s.languages.insert(language_from_string(l, path + ".languages"));
        if (s.languages.empty())
            throw SchemaError(path + ".languages: at least one language required");
    }
    return s;
}

inline TriggerSpec parse_trigger(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw SchemaError(path + ": expected an object");
    detail::check_keys(obj, {"suite_or_bench_id", "cadence"}, path);
    TriggerSpec t;
    t.suite_or_bench_id = detail::need_string(obj, "suite_or_bench_id", path);
    t.cadence = cadence_from_string(detail::need_string(obj, "cadence", path), path + ".cadence");
    return t;
}

inline BenchApp parse_bench_app(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw SchemaError(path + ": expected an object");
    detail::check_keys(obj,
                       {"id", "display_name", "language", "model_variants", "source_dir",
                        "build_command_template", "run_command_template", "expected_output_check"},
                       path);
    BenchApp b;
    b.id = detail::need_string(obj, "id", path);
    b.display_name = detail::opt_string(obj, "display_name", path, b.id);
    b.language = language_from_string(detail::need_string(obj, "language", path), path + ".language");
    if (detail::get_field(obj, "model_variants")) {
        for (const auto& v : detail::opt_string_list(obj, "model_variants", path))
            b.model_variants.insert(variant_from_string(v, path + ".model_variants"));
    } else {
        b.model_variants = {ModelVariant::TGT};
    }
    if (b.model_variants.empty())
        throw SchemaError(path + ".model_variants: at least one variant required");
    b.source_dir = detail::opt_string(obj, "source_dir", path, "");
    b.build_command_template = detail::opt_string(obj, "build_command_template", path, "");
    b.run_command_template = detail::opt_string(obj, "run_command_template", path, "");
    b.expected_output_check = detail::enum_from_string(
        detail::opt_string(obj, "expected_output_check", path, "exit_code_only"),
        {OutputCheck::exit_code_only, OutputCheck::golden_file}, path + ".expected_output_check");
    return b;
}

// Parse the single declarative input document. Strict: unknown keys, wrong
// types, and violations of the structural invariants are SchemaErrors;
// malformed JSON is a SyntaxError carrying line/column.
inline Config parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        detail::syntax_error_at(text, e.byte, e.what());
    }
    if (!doc.is_object()) throw SchemaError("config: top level must be an object");
    detail::check_keys(doc,
                       {"toolchains", "targets", "suites", "benchmarks", "triggers",
                        "job_parallelism", "test_timeout_s", "workspace_dir"},
                       "config");

    Config cfg;
    auto parse_list = [&](const char* key, auto parse_one, auto& out) {
        const json* f = detail::get_field(doc, key);
        if (!f) return;
        if (!f->is_array()) throw SchemaError(std::string("config.") + key + ": expected an array");
        std::size_t i = 0;
        for (const auto& e : *f) {
            out.push_back(parse_one(e, std::string(key) + "[" + std::to_string(i) + "]"));
            ++i;
        }
    };
    parse_list("toolchains", parse_toolchain, cfg.toolchains);
    parse_list("targets", parse_target, cfg.targets);
    parse_list("suites", parse_suite, cfg.suites);
    parse_list("benchmarks", parse_bench_app, cfg.benchmarks);
    parse_list("triggers", parse_trigger, cfg.triggers);

    if (const json* f = detail::get_field(doc, "job_parallelism")) {
        if (!f->is_number_integer() || f->get<int>() < 1)
            throw SchemaError("config.job_parallelism: expected an integer >= 1");
        cfg.job_parallelism = f->get<int>();
    }
    if (const json* f = detail::get_field(doc, "test_timeout_s")) {
        if (!f->is_number() || f->get<double>() <= 0)
            throw SchemaError("config.test_timeout_s: expected a number > 0");
        cfg.test_timeout_s = f->get<double>();
    }
    cfg.workspace_dir = detail::opt_string(doc, "workspace_dir", "config", cfg.workspace_dir);

    if (cfg.toolchains.empty()) throw SchemaError("config.toolchains: at least one toolchain required");
    if (cfg.targets.empty()) throw SchemaError("config.targets: at least one target required");
    if (cfg.suites.empty() && cfg.benchmarks.empty())
        throw SchemaError("config: at least one suite or benchmark required");
    return cfg;
}

// ---------------------------------------------------------------------------
// Canonical rendering (parse ∘ render ∘ parse = parse)
// ---------------------------------------------------------------------------

inline json to_json(const ToolchainSpec& tc) {
    json j;
    j["id"] = tc.id;
    j["display_name"] = tc.display_name;
    j["c_compiler"] = tc.c_compiler;
    j["cxx_compiler"] = tc.cxx_compiler;
    if (tc.fortran_compiler) j["fortran_compiler"] = *tc.fortran_compiler;
    j["version_probe_args"] = tc.version_probe_args;
    j["extra_flags"] = json::object();
    for (const auto& [k, v] : tc.extra_flags) j["extra_flags"][k] = v;
    j["kind"] = to_string(tc.kind);
    return j;
}

inline json to_json(const TargetSpec& t) {
    return json{{"id", t.id},
                {"vendor", to_string(t.vendor)},
                {"accelerator_name", t.accelerator_name},
                {"offload_flags", t.offload_flags}};
}

inline json to_json(const SuiteSpec& s) {
    json langs = json::array();
    for (Language l : s.languages) langs.push_back(to_string(l));
    return json{{"id", s.id},
                {"kind", to_string(s.kind)},
                {"root", s.root},
                {"pinned_commit", s.pinned_commit},
                {"languages", langs}};
}

inline json to_json(const TriggerSpec& t) {
    return json{{"suite_or_bench_id", t.suite_or_bench_id}, {"cadence", to_string(t.cadence)}};
}

inline json to_json(const BenchApp& b) {
    json variants = json::array();
    for (ModelVariant v : b.model_variants) variants.push_back(to_string(v));
    return json{{"id", b.id},
                {"display_name", b.display_name},
                {"language", to_string(b.language)},
                {"model_variants", variants},
                {"source_dir", b.source_dir},
                {"build_command_template", b.build_command_template},
                {"run_command_template", b.run_command_template},
                {"expected_output_check", to_string(b.expected_output_check)}};
}

inline std::string render_config(const Config& cfg) {
    json j;
    j["toolchains"] = json::array();
    for (const auto& t : cfg.toolchains) j["toolchains"].push_back(to_json(t));
    j["targets"] = json::array();
    for (const auto& t : cfg.targets) j["targets"].push_back(to_json(t));
    j["suites"] = json::array();
    for (const auto& s : cfg.suites) j["suites"].push_back(to_json(s));
    j["benchmarks"] = json::array();
    for (const auto& b : cfg.benchmarks) j["benchmarks"].push_back(to_json(b));
    j["triggers"] = json::array();
    for (const auto& t : cfg.triggers) j["triggers"].push_back(to_json(t));
    j["job_parallelism"] = cfg.job_parallelism;
    j["test_timeout_s"] = cfg.test_timeout_s;
    j["workspace_dir"] = cfg.workspace_dir;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

// Full invariant and cross-reference audit. Returns a deduplicated list
// sorted by path; empty means the config is good to plan against. Paths are
// keyed by id, not list index, so issue output is stable under document
// reordering.
inline std::vector<ValidationIssue> validate_config(const Config& cfg) {
    std::set<ValidationIssue> issues;
    auto add = [&](Severity sev, std::string path, std::string msg) {
        issues.insert(ValidationIssue{sev, std::move(path), std::move(msg)});
    };

    if (cfg.toolchains.empty()) add(Severity::error, "toolchains", "at least one toolchain required");
    if (cfg.targets.empty()) add(Severity::error, "targets", "at least one target required");
    if (cfg.suites.empty() && cfg.benchmarks.empty())
        add(Severity::error, "config", "at least one suite or benchmark required");
    if (cfg.job_parallelism < 1)
        add(Severity::error, "job_parallelism", "must be >= 1");
    if (!(cfg.test_timeout_s > 0)) add(Severity::error, "test_timeout_s", "must be > 0");

    auto check_unique = [&](const auto& list, const char* section) {
        std::set<std::string> seen;
        for (const auto& item : list) {
            if (item.id.empty()) {
                add(Severity::error, std::string(section) + "[]", "empty id");
            } else if (!seen.insert(item.id).second) {
                add(Severity::error, std::string(section) + "[" + item.id + "].id",
                    "duplicate id '" + item.id + "'");
            }
        }
    };
    check_unique(cfg.toolchains, "toolchains");
    check_unique(cfg.targets, "targets");
    check_unique(cfg.suites, "suites");
    check_unique(cfg.benchmarks, "benchmarks");

    std::set<std::string> runnable_ids;
    for (const auto& s : cfg.suites) runnable_ids.insert(s.id);
    for (const auto& b : cfg.benchmarks) {
        if (!runnable_ids.insert(b.id).second)
            add(Severity::error, "benchmarks[" + b.id + "].id",
                "id collides with a suite id '" + b.id + "'");
    }

    std::set<std::string> target_ids;
    for (const auto& t : cfg.targets) target_ids.insert(t.id);

    for (const auto& t : cfg.targets) {
        if (t.vendor != Vendor::host && t.offload_flags.empty())
            add(Severity::error, "targets[" + t.id + "].offload_flags",
                "must be non-empty for vendor '" + std::string(to_string(t.vendor)) + "'");
    }

    for (const auto& tc : cfg.toolchains) {
        for (const auto& [tgt_id, flags] : tc.extra_flags) {
            (void)flags;
            if (!target_ids.count(tgt_id))
                add(Severity::error, "toolchains[" + tc.id + "].extra_flags[" + tgt_id + "]",
                    "references unknown target id '" + tgt_id + "'");
        }
        if (!tc.fortran_compiler) {
            for (const auto& s : cfg.suites) {
                if (s.languages.count(Language::Fortran))
                    add(Severity::warning, "toolchains[" + tc.id + "].fortran_compiler",
                        "Fortran tests in suite '" + s.id +
                            "' will be skipped for this toolchain (no Fortran compiler)");
            }
            for (const auto& b : cfg.benchmarks) {
                if (b.language == Language::Fortran)
                    add(Severity::warning, "toolchains[" + tc.id + "].fortran_compiler",
                        "Fortran benchmark '" + b.id +
                            "' will be skipped for this toolchain (no Fortran compiler)");
            }
        }
    }

    for (const auto& trg : cfg.triggers) {
        if (!runnable_ids.count(trg.suite_or_bench_id))
            add(Severity::error, "triggers[" + trg.suite_or_bench_id + "]",
                "references unknown suite or benchmark id '" + trg.suite_or_bench_id + "'");
    }

    for (const auto& s : cfg.suites) {
        std::error_code ec;
        if (s.root.empty() || !std::filesystem::is_directory(s.root, ec))
            add(Severity::error, "suites[" + s.id + "].root",
                "suite root is not a readable directory: '" + s.root + "'");
        if (s.languages.empty())
            add(Severity::error, "suites[" + s.id + "].languages",
                "at least one language required");
    }

    return {issues.begin(), issues.end()};
}

inline bool has_errors(const std::vector<ValidationIssue>& issues) {
    return std::any_of(issues.begin(), issues.end(),
                       [](const ValidationIssue& i) { return i.severity == Severity::error; });
}

} // namespace ompforge
