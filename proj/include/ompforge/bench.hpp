#pragma once

#include "ompforge/config.hpp"
#include "ompforge/errors.hpp"
#include "ompforge/mock.hpp"
#include "ompforge/subprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ompforge {

enum class BenchStatusKind { time, build_error, exec_error };

inline const char* to_string(BenchStatusKind k) {
    switch (k) {
    case BenchStatusKind::time: return "time";
    case BenchStatusKind::build_error: return "BE";
    case BenchStatusKind::exec_error: return "EE";
    }
    return "?";
}

struct BenchSample {
    std::string app_id;
    ModelVariant variant = ModelVariant::TGT;
    std::string toolchain_id;
    std::string target_id;
    double wall_seconds = 0.0;
    bool verified = false;

    bool operator==(const BenchSample&) const = default;
};

// One benchmark cell: either an estimated base time over verified runs, or
// the error class that stopped it (BE never ran; EE ran but no usable
// sample survived).
struct BenchResult {
    std::string app_id;
    ModelVariant variant = ModelVariant::TGT;
    std::string toolchain_id;
    std::string target_id;
    BenchStatusKind status = BenchStatusKind::time;
    double estimated_base_seconds = 0.0; // meaningful only for status == time
    std::vector<BenchSample> samples;

    bool operator==(const BenchResult&) const = default;
};

// Median of the samples: middle element for odd counts, lower median for
// even. Permutation-invariant and always within [min, max].
inline double estimate_base_time(std::vector<double> samples) {
    if (samples.empty()) throw EmptySamples("estimate_base_time: no samples");
    std::size_t mid = (samples.size() - 1) / 2;
    std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(mid),
                     samples.end());
    return samples[mid];
}

// Options for run_benchmark: an already-loaded mock manifest, and the work
// directory real builds compile into.
struct RunBenchOptions {
    const MockManifest* manifest = nullptr;
    std::string work_dir;
};

namespace detail {

inline std::string expand_template(std::string text, const ToolchainSpec& tc, const TargetSpec& tgt,
                                   const BenchApp& app, const std::string& out_dir) {
    std::string flags;
    for (const auto& f : tgt.offload_flags) {
        if (!flags.empty()) flags += ' ';
        flags += f;
    }
    if (auto it = tc.extra_flags.find(tgt.id); it != tc.extra_flags.end()) {
        for (const auto& f : it->second) {
            if (!flags.empty()) flags += ' ';
            flags += f;
        }
    }
    auto replace_all = [&](const std::string& key, const std::string& value) {
        std::size_t pos = 0;
        while ((pos = text.find(key, pos)) != std::string::npos) {
            text.replace(pos, key.size(), value);
            pos += value.size();
        }
    };
    replace_all("{cc}", tc.c_compiler);
    replace_all("{cxx}", tc.cxx_compiler);
    replace_all("{fc}", tc.fortran_compiler.value_or(""));
    replace_all("{flags}", flags);
    replace_all("{src}", app.source_dir);
    replace_all("{out}", out_dir);
    return text;
}

inline bool golden_matches(const BenchApp& app, const std::string& produced) {
    std::ifstream golden(app.source_dir + "/expected_output.txt", std::ios::binary);
    if (!golden) return false;
    std::ostringstream ss;
    ss << golden.rdbuf();
    return ss.str() == produced;
}

} // namespace detail

// Build once, then time n_runs sequential runs. A failed build is BE with
// no samples. Any crashed, timed-out, or unverified run stops the cell as
// EE; samples recorded up to that point are kept but none counts as
// verified, since no base-time estimate exists for the cell.
inline BenchResult run_benchmark(const BenchApp& app, ModelVariant variant, const ToolchainSpec& tc,
                                 const TargetSpec& tgt, int n_runs, double timeout_s,
                                 const RunBenchOptions& opts = {}) {
    if (n_runs < 1 || n_runs % 2 == 0)
        throw Error("run_benchmark: n_runs must be a positive odd number");
    if (!tc.supports(app.language))
        throw ToolchainUnavailable("toolchain '" + tc.id + "' cannot build " +
                                   to_string(app.language) + " benchmark '" + app.id + "'");

    BenchResult result;
    result.app_id = app.id;
    result.variant = variant;
    result.toolchain_id = tc.id;
    result.target_id = tgt.id;

    MockManifest local_manifest;
    const MockManifest* manifest = opts.manifest;
    const bool mock = tc.kind == ToolchainKind::mock;
    if (mock && !manifest) {
        local_manifest = load_manifest_file(tc.c_compiler);
        manifest = &local_manifest;
    }
    const std::string subject = bench_key(app.id, variant);

    // Build phase.
    bool build_ok = false;
    if (mock) {
        build_ok = mock_invoke(*manifest, MockRole::bench_build, subject).exit_code == 0;
    } else {
        std::string cmd = detail::expand_template(app.build_command_template, tc, tgt, app, opts.work_dir);
        if (cmd.empty()) throw ToolchainUnavailable("benchmark '" + app.id + "' has no build command");
        if (!opts.work_dir.empty()) {
            std::error_code ec;
            std::filesystem::create_directories(opts.work_dir, ec);
        }
        ProcessResult p = run_shell(cmd, timeout_s, opts.work_dir);
        build_ok = !p.timed_out && p.exit_code == 0;
    }
    if (!build_ok) {
        result.status = BenchStatusKind::build_error;
        return result;
    }

    // Run phase: n_runs back-to-back, stopping at the first failure.
    std::vector<double> times;
    bool failed = false;
    for (int run = 0; run < n_runs && !failed; ++run) {
        double wall = 0.0;
        bool completed = false, verified = false;
        if (mock) {
            SimulatedProcess p =
                mock_invoke(*manifest, MockRole::bench_run, subject, static_cast<std::size_t>(run));
            wall = p.seconds;
            completed = p.seconds <= timeout_s;
            verified = completed && p.exit_code == 0;
        } else {
            std::string cmd = detail::expand_template(app.run_command_template, tc, tgt, app, opts.work_dir);
            ProcessResult p = run_shell(cmd, timeout_s, opts.work_dir);
            wall = p.seconds;
            completed = !p.timed_out && !p.signaled && p.exit_code < 125;
            if (completed) {
                verified = app.expected_output_check == OutputCheck::exit_code_only
                               ? p.exit_code == 0
                               : p.exit_code == 0 && detail::golden_matches(app, p.output);
            }
        }
        if (completed && wall > 0) {
            BenchSample s;
            s.app_id = app.id;
            s.variant = variant;
            s.toolchain_id = tc.id;
            s.target_id = tgt.id;
            s.wall_seconds = wall;
            s.verified = verified;
            result.samples.push_back(std::move(s));
        }
        if (!completed || !verified) {
            failed = true;
        } else {
            times.push_back(wall);
        }
    }

    if (failed) {
        result.status = BenchStatusKind::exec_error;
        for (auto& s : result.samples) s.verified = false; // no usable estimate for this cell
        return result;
    }
    result.status = BenchStatusKind::time;
    result.estimated_base_seconds = estimate_base_time(times);
    return result;
}

// Programming-model ratio for one app: OpenMP-offload time over OpenACC
// time. Comparable only when both cells carry times. Cross-compiler
// comparisons are legitimate (one compiler's offload run against another's
// OpenACC reference), so only the app identity is enforced.
struct ModelComparison {
    std::string app_id;
    bool comparable = false;
    double ratio = 0.0;
    std::string reason; // why not comparable
};

inline ModelComparison compare_models(const BenchResult& tgt_result, const BenchResult& acc_result) {
    if (tgt_result.app_id != acc_result.app_id)
        throw AppMismatch("compare_models: '" + tgt_result.app_id + "' vs '" + acc_result.app_id + "'");
    ModelComparison cmp;
    cmp.app_id = tgt_result.app_id;
    auto describe = [](const BenchResult& r) -> std::string {
        return r.status == BenchStatusKind::build_error ? "build error" : "execution error";
    };
    if (tgt_result.status != BenchStatusKind::time) {
        cmp.reason = describe(tgt_result);
        return cmp;
    }
    if (acc_result.status != BenchStatusKind::time) {
        cmp.reason = describe(acc_result);
        return cmp;
    }
    cmp.comparable = true;
    cmp.ratio = tgt_result.estimated_base_seconds / acc_result.estimated_base_seconds;
    return cmp;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline json to_json(const BenchSample& s) {
    return json{{"app_id", s.app_id},       {"variant", to_string(s.variant)},
                {"toolchain_id", s.toolchain_id}, {"target_id", s.target_id},
                {"wall_seconds", s.wall_seconds}, {"verified", s.verified}};
}

inline json to_json(const BenchResult& r) {
    json samples = json::array();
    for (const auto& s : r.samples) samples.push_back(to_json(s));
    json j{{"app_id", r.app_id},
           {"variant", to_string(r.variant)},
           {"toolchain_id", r.toolchain_id},
           {"target_id", r.target_id},
           {"status", to_string(r.status)},
           {"samples", samples}};
    if (r.status == BenchStatusKind::time) j["estimated_base_seconds"] = r.estimated_base_seconds;
    return j;
}

inline BenchResult bench_result_from_json(const json& j) {
    BenchResult r;
    r.app_id = j.at("app_id").get<std::string>();
    r.variant = variant_from_string(j.at("variant").get<std::string>());
    r.toolchain_id = j.at("toolchain_id").get<std::string>();
    r.target_id = j.at("target_id").get<std::string>();
    std::string status = j.at("status").get<std::string>();
    if (status == "time") {
        r.status = BenchStatusKind::time;
        r.estimated_base_seconds = j.at("estimated_base_seconds").get<double>();
    } else if (status == "BE") {
        r.status = BenchStatusKind::build_error;
    } else if (status == "EE") {
        r.status = BenchStatusKind::exec_error;
    } else {
        throw SchemaError("unknown bench status '" + status + "'");
    }
    for (const auto& e : j.value("samples", json::array())) {
        BenchSample s;
        s.app_id = e.at("app_id").get<std::string>();
        s.variant = variant_from_string(e.at("variant").get<std::string>());
        s.toolchain_id = e.at("toolchain_id").get<std::string>();
        s.target_id = e.at("target_id").get<std::string>();
        s.wall_seconds = e.at("wall_seconds").get<double>();
        s.verified = e.at("verified").get<bool>();
        r.samples.push_back(std::move(s));
    }
    return r;
}

} // namespace ompforge
