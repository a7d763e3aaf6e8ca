#pragma once

#include "ompforge/config.hpp"
#include "ompforge/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace ompforge {

enum class MockCompile { ok, fail };
enum class MockRunKind { exit_code, crash, hang };
enum class MockRole { compile, run, bench_build, bench_run };

inline const char* to_string(MockRole r) {
    switch (r) {
    case MockRole::compile: return "compile";
    case MockRole::run: return "run";
    case MockRole::bench_build: return "bench_build";
    case MockRole::bench_run: return "bench_run";
    }
    return "?";
}

// Simulated behavior of one test under the stand-in toolchain.
struct Behavior {
    MockCompile compile = MockCompile::ok;
    MockRunKind run = MockRunKind::exit_code;
    int run_exit_code = 0;
    double compile_seconds = 0.0;
    double run_seconds = 0.0;

    bool operator==(const Behavior&) const = default;
};

// Simulated behavior of one (benchmark app, variant) cell.
struct BenchBehavior {
    bool build_ok = true;
    std::vector<double> run_seconds_sequence; // consumed one entry per run
    bool verify = true;

    bool operator==(const BenchBehavior&) const = default;
};

// A hang reports this duration so any realistic timeout ceiling trips.
inline constexpr double kMockHangSeconds = 1.0e9;

// Crash is reported as 128+SIGABRT, inside the runtime-failure exit band.
inline constexpr int kMockCrashExitCode = 134;

namespace detail {

// '*' and '?' wildcard match, iterative with backtracking.
inline bool glob_match(const std::string& pattern, const std::string& name) {
    std::size_t p = 0, n = 0, star = std::string::npos, star_n = 0;
    while (n < name.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
            ++p;
            ++n;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            star_n = n;
        } else if (star != std::string::npos) {
            p = star + 1;
            n = ++star_n;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

inline std::size_t glob_literal_prefix(const std::string& pattern) {
    std::size_t i = 0;
    while (i < pattern.size() && pattern[i] != '*' && pattern[i] != '?') ++i;
    return i;
}

inline bool glob_is_exact(const std::string& pattern) {
    return glob_literal_prefix(pattern) == pattern.size();
}

} // namespace detail

// Manifest of simulated behaviors. Globs over test names resolve most
// specific first: longest literal prefix wins, an exact name beats a
// wildcard pattern with the same prefix, remaining ties break on the
// pattern string itself.
struct MockManifest {
    std::optional<Behavior> default_behavior;
    std::map<std::string, Behavior> per_test;                 // glob -> behavior
    std::map<std::string, BenchBehavior> per_bench;           // "app:variant" -> behavior
    std::vector<std::string> self_test;                       // names checked for ambiguity at load
    double sleep_scale = 0.0;                                 // 0 = report durations, never sleep

    const Behavior* resolve(const std::string& test_name) const {
        const Behavior* best = nullptr;
        std::size_t best_prefix = 0;
        bool best_exact = false;
        std::string best_pattern;
        for (const auto& [pattern, behavior] : per_test) {
            if (!detail::glob_match(pattern, test_name)) continue;
            std::size_t prefix = detail::glob_literal_prefix(pattern);
            bool exact = detail::glob_is_exact(pattern);
            bool better = !best || prefix > best_prefix || (prefix == best_prefix && exact && !best_exact) ||
                          (prefix == best_prefix && exact == best_exact && pattern < best_pattern);
            if (better) {
                best = &behavior;
                best_prefix = prefix;
                best_exact = exact;
                best_pattern = pattern;
            }
        }
        if (best) return best;
        return default_behavior ? &*default_behavior : nullptr;
    }

    const BenchBehavior* resolve_bench(const std::string& app_id, ModelVariant variant) const {
        auto it = per_bench.find(app_id + ":" + to_string(variant));
        return it == per_bench.end() ? nullptr : &it->second;
    }
};

inline std::string bench_key(const std::string& app_id, ModelVariant variant) {
    return app_id + ":" + to_string(variant);
}

namespace detail {

inline Behavior parse_behavior(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw SchemaError(path + ": expected an object");
    check_keys(obj, {"compile", "run", "compile_seconds", "run_seconds"}, path);
    Behavior b;
    std::string compile = opt_string(obj, "compile", path, "ok");
    if (compile == "ok")
        b.compile = MockCompile::ok;
    else if (compile == "fail")
        b.compile = MockCompile::fail;
    else
        throw SchemaError(path + ".compile: expected 'ok' or 'fail'");
    std::string run = opt_string(obj, "run", path, "exit:0");
    if (run == "crash") {
        b.run = MockRunKind::crash;
    } else if (run == "hang") {
        b.run = MockRunKind::hang;
    } else if (run.rfind("exit:", 0) == 0) {
        b.run = MockRunKind::exit_code;
        try {
            b.run_exit_code = std::stoi(run.substr(5));
        } catch (const std::exception&) {
            throw SchemaError(path + ".run: bad exit code in '" + run + "'");
        }
        if (b.run_exit_code < 0 || b.run_exit_code > 255)
            throw SchemaError(path + ".run: exit code out of range in '" + run + "'");
    } else {
        throw SchemaError(path + ".run: expected 'exit:<code>', 'crash', or 'hang'");
    }
    if (const json* f = get_field(obj, "compile_seconds")) {
        if (!f->is_number() || f->get<double>() < 0)
            throw SchemaError(path + ".compile_seconds: expected a number >= 0");
        b.compile_seconds = f->get<double>();
    }
    if (const json* f = get_field(obj, "run_seconds")) {
        if (!f->is_number() || f->get<double>() < 0)
            throw SchemaError(path + ".run_seconds: expected a number >= 0");
        b.run_seconds = f->get<double>();
    }
    return b;
}

inline BenchBehavior parse_bench_behavior(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw SchemaError(path + ": expected an object");
    check_keys(obj, {"build", "run_seconds_sequence", "verify"}, path);
    BenchBehavior b;
    std::string build = opt_string(obj, "build", path, "ok");
    if (build == "ok")
        b.build_ok = true;
    else if (build == "fail")
        b.build_ok = false;
    else
        throw SchemaError(path + ".build: expected 'ok' or 'fail'");
    if (const json* f = get_field(obj, "run_seconds_sequence")) {
        if (!f->is_array()) throw SchemaError(path + ".run_seconds_sequence: expected an array");
        for (const auto& e : *f) {
            if (!e.is_number() || e.get<double>() <= 0)
                throw SchemaError(path + ".run_seconds_sequence: entries must be numbers > 0");
            b.run_seconds_sequence.push_back(e.get<double>());
        }
    }
    if (const json* f = get_field(obj, "verify")) {
        if (!f->is_boolean()) throw SchemaError(path + ".verify: expected a boolean");
        b.verify = f->get<bool>();
    }
    return b;
}

} // namespace detail

// Parse and validate a behavior manifest. Each name in `self_test` is
// resolved against the glob table; two non-exact globs with equal literal
// prefix both matching it is an AmbiguousGlob error.
inline MockManifest load_manifest(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        detail::syntax_error_at(text, e.byte, e.what());
    }
    if (!doc.is_object()) throw SchemaError("manifest: top level must be an object");
    detail::check_keys(doc, {"default_behavior", "per_test", "per_bench", "self_test", "sleep_scale"},
                       "manifest");
    MockManifest m;
    if (const json* f = detail::get_field(doc, "default_behavior"))
        m.default_behavior = detail::parse_behavior(*f, "manifest.default_behavior");
    if (const json* f = detail::get_field(doc, "per_test")) {
        if (!f->is_object()) throw SchemaError("manifest.per_test: expected an object");
        for (auto it = f->begin(); it != f->end(); ++it)
            m.per_test[it.key()] = detail::parse_behavior(it.value(), "manifest.per_test[" + it.key() + "]");
    }
    if (const json* f = detail::get_field(doc, "per_bench")) {
        if (!f->is_object()) throw SchemaError("manifest.per_bench: expected an object");
        for (auto it = f->begin(); it != f->end(); ++it) {
            if (it.key().find(':') == std::string::npos)
                throw SchemaError("manifest.per_bench[" + it.key() + "]: key must be '<app_id>:<variant>'");
            m.per_bench[it.key()] =
                detail::parse_bench_behavior(it.value(), "manifest.per_bench[" + it.key() + "]");
        }
    }
    if (const json* f = detail::get_field(doc, "self_test")) {
        if (!f->is_array()) throw SchemaError("manifest.self_test: expected an array of names");
        for (const auto& e : *f) {
            if (!e.is_string()) throw SchemaError("manifest.self_test: expected an array of names");
            m.self_test.push_back(e.get<std::string>());
        }
    }
    if (const json* f = detail::get_field(doc, "sleep_scale")) {
        if (!f->is_number() || f->get<double>() < 0)
            throw SchemaError("manifest.sleep_scale: expected a number >= 0");
        m.sleep_scale = f->get<double>();
    }

    for (const auto& name : m.self_test) {
        std::map<std::size_t, std::vector<std::string>> non_exact_by_prefix;
        for (const auto& [pattern, behavior] : m.per_test) {
            (void)behavior;
            if (!detail::glob_match(pattern, name) || detail::glob_is_exact(pattern)) continue;
            non_exact_by_prefix[detail::glob_literal_prefix(pattern)].push_back(pattern);
        }
        for (const auto& [prefix, patterns] : non_exact_by_prefix) {
            (void)prefix;
            if (patterns.size() > 1)
                throw AmbiguousGlob("manifest.self_test: globs '" + patterns[0] + "' and '" +
                                    patterns[1] + "' match '" + name +
                                    "' with equal specificity");
        }
    }
    return m;
}

inline MockManifest load_manifest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ToolchainUnavailable("mock manifest not readable: '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_manifest(ss.str());
}

// Result of one simulated invocation. Durations are reported, not slept,
// unless the manifest sets sleep_scale > 0.
struct SimulatedProcess {
    int exit_code = 0;
    double seconds = 0.0;
    std::string output;
};

// Deterministic simulated process result for (manifest, role, subject).
// For bench_run the caller passes the zero-based run index so sequences
// stay a pure lookup.
inline SimulatedProcess mock_invoke(const MockManifest& manifest, MockRole role,
                                    const std::string& subject, std::size_t run_index = 0) {
    SimulatedProcess out;
    auto marker = [&](const char* verdict) {
        return std::string("mock ") + to_string(role) + " " + subject + ": " + verdict + "\n";
    };

    if (role == MockRole::compile || role == MockRole::run) {
        const Behavior* b = manifest.resolve(subject);
        if (!b)
            throw UnknownSubject("no behavior for '" + subject + "' and no default_behavior set");
        if (role == MockRole::compile) {
            out.seconds = b->compile_seconds;
            out.exit_code = b->compile == MockCompile::ok ? 0 : 1;
            out.output = marker(out.exit_code == 0 ? "ok" : "error: simulated compile failure");
        } else {
            switch (b->run) {
            case MockRunKind::exit_code:
                out.exit_code = b->run_exit_code;
                out.seconds = b->run_seconds;
                out.output = marker(out.exit_code == 0 ? "ok" : "nonzero exit");
                break;
            case MockRunKind::crash:
                out.exit_code = kMockCrashExitCode;
                out.seconds = b->run_seconds;
                out.output = marker("aborted");
                break;
            case MockRunKind::hang:
                out.exit_code = 0;
                out.seconds = std::max(b->run_seconds, kMockHangSeconds);
                out.output = marker("hang");
                break;
            }
        }
    } else {
        // Bench roles fall back to the default behavior when no per_bench
        // entry exists: compile maps to build, run exit:0 to a verified run.
        const BenchBehavior* bb = nullptr;
        BenchBehavior derived;
        auto sep = subject.find(':');
        auto it = manifest.per_bench.find(subject);
        if (it != manifest.per_bench.end()) {
            bb = &it->second;
        } else if (manifest.default_behavior && sep != std::string::npos) {
            const Behavior& d = *manifest.default_behavior;
            derived.build_ok = d.compile == MockCompile::ok;
            derived.verify = d.run == MockRunKind::exit_code && d.run_exit_code == 0;
            derived.run_seconds_sequence.assign(64, d.run_seconds > 0 ? d.run_seconds : 1.0);
            bb = &derived;
        }
        if (!bb) throw UnknownSubject("no bench behavior for '" + subject + "' and no default_behavior set");
        if (role == MockRole::bench_build) {
            out.exit_code = bb->build_ok ? 0 : 1;
            out.seconds = 0.0;
            out.output = marker(out.exit_code == 0 ? "ok" : "error: simulated build failure");
        } else {
            if (run_index >= bb->run_seconds_sequence.size())
                throw Error("mock bench '" + subject + "': run_seconds_sequence exhausted at run " +
                            std::to_string(run_index));
            out.exit_code = bb->verify ? 0 : 1; // nonzero = verification failed
            out.seconds = bb->run_seconds_sequence[run_index];
            out.output = marker(bb->verify ? "verified" : "verification failed");
        }
    }

    if (manifest.sleep_scale > 0 && out.seconds > 0 && out.seconds < kMockHangSeconds) {
        std::this_thread::sleep_for(
            std::chrono::duration<double>(out.seconds * manifest.sleep_scale));
    }
    return out;
}

} // namespace ompforge
