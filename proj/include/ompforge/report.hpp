#pragma once

#include "ompforge/bench.hpp"
#include "ompforge/clock.hpp"
#include "ompforge/suite.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace ompforge {

enum class LanguageGroup { C_and_CXX, Fortran };

inline const char* to_string(LanguageGroup g) {
    return g == LanguageGroup::C_and_CXX ? "C_and_CXX" : "Fortran";
}

inline const char* display_label(LanguageGroup g) {
    return g == LanguageGroup::C_and_CXX ? "C & C++" : "Fortran";
}

inline LanguageGroup group_of(Language lang) {
    return lang == Language::Fortran ? LanguageGroup::Fortran : LanguageGroup::C_and_CXX;
}

// Everything one pipeline run learned, frozen to disk: the evidence the
// reporting shapes aggregate over.
struct ResultsSnapshot {
    std::string snapshot_id;
    Timestamp captured_at = 0;
    std::string system_label; // e.g. "Frontier"
    std::map<std::string, std::string> commit_pins;
    std::vector<TestOutcome> outcomes;
    std::vector<BenchResult> bench;
};

// A (system, toolchain) report column.
struct ColumnKey {
    std::string system_label;
    std::string toolchain_id;

    bool operator==(const ColumnKey&) const = default;
    bool operator<(const ColumnKey& o) const {
        if (system_label != o.system_label) return system_label < o.system_label;
        return toolchain_id < o.toolchain_id;
    }
    std::string label() const { return system_label + "/" + toolchain_id; }
};

// Pass counts per spec version per column, plus the computed Total row.
// Unknown-version outcomes never enter the matrix; they are tallied aside.
struct VersionMatrix {
    LanguageGroup group = LanguageGroup::C_and_CXX;
    std::vector<ColumnKey> columns;
    std::map<SpecVersion, std::vector<int>> cells; // version -> per-column pass counts
    std::vector<int> totals;                       // per-column column sums
    std::vector<int> unknown_excluded;             // per-column side tally (all unknown outcomes)
    std::map<SpecVersion, std::vector<std::map<Language, int>>> raw; // per-language breakdown
};

struct LanguageTotals {
    std::string system_label;
    std::string toolchain_id;
    LanguageGroup group = LanguageGroup::C_and_CXX;
    int pass_count = 0;
    int denominator = 0; // distinct tests discovered in the group

    bool operator==(const LanguageTotals&) const = default;
};

struct TimeSeriesPoint {
    Timestamp date = 0;
    std::string system_label;
    std::string toolchain_id;
    LanguageGroup group = LanguageGroup::C_and_CXX;
    int pass_count = 0;

    bool operator==(const TimeSeriesPoint&) const = default;
};

struct BenchTable {
    std::vector<ColumnKey> columns;
    std::vector<std::string> app_ids;            // sorted
    std::vector<std::vector<std::string>> cells; // [app][column]: "38.29" | "BE" | "EE" | "-"
};

inline std::string format_seconds(double seconds) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", seconds);
    return buf;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

namespace detail {

// Test identity for set-semantics counting: a test passing on two targets
// of the same column still counts once.
using TestKey = std::pair<std::string, std::string>; // (suite_id, rel_path)

} // namespace detail

// Distinct-test pass counts per spec version for one language group, one
// column per (system, toolchain) pair seen across the snapshots. A test
// counts for a column when any of its outcomes there passed.
// Permutation-invariant over the outcome lists.
inline VersionMatrix aggregate_by_version(std::span<const ResultsSnapshot> snapshots,
                                          LanguageGroup group) {
    VersionMatrix m;
    m.group = group;
    std::set<ColumnKey> keys;
    for (const auto& snap : snapshots)
        for (const auto& o : snap.outcomes)
            keys.insert(ColumnKey{snap.system_label, o.toolchain_id});
    m.columns.assign(keys.begin(), keys.end());
    auto column_index = [&](const ColumnKey& k) {
        return static_cast<std::size_t>(
            std::lower_bound(m.columns.begin(), m.columns.end(), k) - m.columns.begin());
    };

    std::map<SpecVersion, std::vector<std::map<Language, std::set<detail::TestKey>>>> passing;
    std::vector<std::set<detail::TestKey>> unknown_seen(m.columns.size());
    for (SpecVersion v : known_spec_versions()) passing[v].assign(m.columns.size(), {});

    for (const auto& snap : snapshots) {
        for (const auto& o : snap.outcomes) {
            if (group_of(o.test.language) != group) continue;
            std::size_t col = column_index(ColumnKey{snap.system_label, o.toolchain_id});
            detail::TestKey key{o.test.suite_id, o.test.rel_path};
            if (o.test.spec_version == SpecVersion::unknown) {
                unknown_seen[col].insert(key);
                continue;
            }
            if (o.phase_result != PhaseResult::pass) continue;
            passing[o.test.spec_version][col][o.test.language].insert(key);
        }
    }

    for (SpecVersion v : known_spec_versions()) {
        m.cells[v].assign(m.columns.size(), 0);
        m.raw[v].assign(m.columns.size(), {});
    }
    m.totals.assign(m.columns.size(), 0);
    m.unknown_excluded.assign(m.columns.size(), 0);
    for (std::size_t col = 0; col < m.columns.size(); ++col) {
        for (SpecVersion v : known_spec_versions()) {
            int cell = 0;
            for (const auto& [lang, tests] : passing[v][col]) {
                m.raw[v][col][lang] = static_cast<int>(tests.size());
                cell += static_cast<int>(tests.size());
            }
            m.cells[v][col] = cell;
            m.totals[col] += cell;
        }
        m.unknown_excluded[col] = static_cast<int>(unknown_seen[col].size());
    }
    return m;
}

inline VersionMatrix aggregate_by_version(const ResultsSnapshot& snapshot, LanguageGroup group) {
    return aggregate_by_version(std::span<const ResultsSnapshot>(&snapshot, 1), group);
}

// Pass count and discovered-test denominator per (toolchain, group). The
// denominator counts distinct tests present in the snapshot for the group,
// across all toolchains, so every toolchain is scored out of the same
// total; pass counts are distinct passing tests, so multi-target snapshots
// never exceed the denominator.
inline std::vector<LanguageTotals> totals_by_language(const ResultsSnapshot& snapshot) {
    std::map<LanguageGroup, std::set<detail::TestKey>> discovered;
    std::map<std::pair<std::string, LanguageGroup>, std::set<detail::TestKey>> passing;
    std::set<std::string> toolchains;
    for (const auto& o : snapshot.outcomes) {
        LanguageGroup g = group_of(o.test.language);
        detail::TestKey key{o.test.suite_id, o.test.rel_path};
        discovered[g].insert(key);
        toolchains.insert(o.toolchain_id);
        if (o.phase_result == PhaseResult::pass) passing[{o.toolchain_id, g}].insert(key);
    }
    std::vector<LanguageTotals> out;
    for (const std::string& tc : toolchains) {
        for (LanguageGroup g : {LanguageGroup::C_and_CXX, LanguageGroup::Fortran}) {
            LanguageTotals t;
            t.system_label = snapshot.system_label;
            t.toolchain_id = tc;
            t.group = g;
            t.denominator = static_cast<int>(discovered[g].size());
            t.pass_count = static_cast<int>(passing[{tc, g}].size());
            out.push_back(std::move(t));
        }
    }
    return out;
}

// One point per (snapshot, toolchain, language group), in time order.
inline std::vector<TimeSeriesPoint> evolution_series(std::span<const ResultsSnapshot> snapshots) {
    std::vector<const ResultsSnapshot*> ordered;
    for (const auto& s : snapshots) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(), [](const ResultsSnapshot* a, const ResultsSnapshot* b) {
        if (a->captured_at != b->captured_at) return a->captured_at < b->captured_at;
        return a->snapshot_id < b->snapshot_id;
    });
    std::vector<TimeSeriesPoint> points;
    for (const ResultsSnapshot* snap : ordered) {
        for (const LanguageTotals& t : totals_by_language(*snap)) {
            TimeSeriesPoint p;
            p.date = snap->captured_at;
            p.system_label = snap->system_label;
            p.toolchain_id = t.toolchain_id;
            p.group = t.group;
            p.pass_count = t.pass_count;
            points.push_back(std::move(p));
        }
    }
    return points;
}

// Benchmark table: rows are apps, columns are (system, toolchain), cells
// carry the 2-decimal base time or the error class. Missing cells render
// as "-".
inline BenchTable bench_table(std::span<const ResultsSnapshot> snapshots,
                              ModelVariant variant = ModelVariant::TGT) {
    BenchTable t;
    std::set<ColumnKey> keys;
    std::set<std::string> apps;
    std::map<std::pair<std::string, std::string>, std::string> cell_text; // (app, column label)
    for (const auto& snap : snapshots) {
        for (const auto& r : snap.bench) {
            if (r.variant != variant) continue;
            ColumnKey key{snap.system_label, r.toolchain_id};
            keys.insert(key);
            apps.insert(r.app_id);
            std::string text = r.status == BenchStatusKind::time
                                   ? format_seconds(r.estimated_base_seconds)
                                   : to_string(r.status);
            cell_text[{r.app_id, key.label()}] = std::move(text);
        }
    }
    t.columns.assign(keys.begin(), keys.end());
    t.app_ids.assign(apps.begin(), apps.end());
    for (const std::string& app : t.app_ids) {
        std::vector<std::string> row;
        for (const ColumnKey& col : t.columns) {
            auto it = cell_text.find({app, col.label()});
            row.push_back(it == cell_text.end() ? "-" : it->second);
        }
        t.cells.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

enum class ReportFormat { json, csv, markdown };

inline ReportFormat report_format_from_string(const std::string& s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    if (s == "markdown") return ReportFormat::markdown;
    throw SchemaError("unknown report format '" + s + "' (expected json, csv, or markdown)");
}

inline const char* file_extension(ReportFormat f) {
    switch (f) {
    case ReportFormat::json: return "json";
    case ReportFormat::csv: return "csv";
    case ReportFormat::markdown: return "md";
    }
    return "txt";
}

// Header row plus string cells; the lowering every shape shares before
// formatting. CSV output quotes per RFC 4180 when needed.
struct TextTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

namespace detail {

inline std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string render_csv(const TextTable& t) {
    std::string out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_escape(row[i]);
        }
        out += '\n';
    };
    emit_row(t.header);
    for (const auto& row : t.rows) emit_row(row);
    return out;
}

inline std::string render_markdown(const TextTable& t) {
    std::string out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        out += '|';
        for (const auto& cell : row) {
            out += ' ';
            out += cell;
            out += " |";
        }
        out += '\n';
    };
    emit_row(t.header);
    out += '|';
    for (std::size_t i = 0; i < t.header.size(); ++i) out += " --- |";
    out += '\n';
    for (const auto& row : t.rows) emit_row(row);
    return out;
}

inline std::string render_table(const TextTable& t, ReportFormat format) {
    switch (format) {
    case ReportFormat::csv: return render_csv(t);
    case ReportFormat::markdown: return render_markdown(t);
    case ReportFormat::json: {
        json rows = json::array();
        for (const auto& row : t.rows) {
            json obj;
            for (std::size_t i = 0; i < t.header.size() && i < row.size(); ++i)
                obj[t.header[i]] = row[i];
            rows.push_back(obj);
        }
        return rows.dump(2) + "\n";
    }
    }
    return {};
}

} // namespace detail

inline TextTable to_text_table(const VersionMatrix& m) {
    TextTable t;
    t.header.push_back("Version");
    for (const ColumnKey& c : m.columns) t.header.push_back(c.label());
    if (m.columns.empty()) return t; // nothing aggregated: header only
    for (SpecVersion v : known_spec_versions()) {
        std::vector<std::string> row{to_string(v)};
        for (std::size_t col = 0; col < m.columns.size(); ++col)
            row.push_back(std::to_string(m.cells.at(v)[col]));
        t.rows.push_back(std::move(row));
    }
    std::vector<std::string> total{"Total"};
    for (int v : m.totals) total.push_back(std::to_string(v));
    t.rows.push_back(std::move(total));
    return t;
}

inline json to_json(const VersionMatrix& m) {
    json columns = json::array();
    for (const ColumnKey& c : m.columns)
        columns.push_back({{"system", c.system_label}, {"toolchain", c.toolchain_id}});
    json rows;
    for (SpecVersion v : known_spec_versions()) {
        json row = json::array();
        for (std::size_t col = 0; col < m.columns.size(); ++col) {
            json cell{{"pass", m.cells.at(v)[col]}};
            for (const auto& [lang, count] : m.raw.at(v)[col]) cell["by_language"][to_string(lang)] = count;
            row.push_back(cell);
        }
        rows[to_string(v)] = row;
    }
    return json{{"language_group", to_string(m.group)},
                {"columns", columns},
                {"rows", rows},
                {"totals", m.totals},
                {"unknown_excluded", m.unknown_excluded}};
}

inline std::string render(const VersionMatrix& m, ReportFormat format) {
    if (format == ReportFormat::json) return to_json(m).dump(2) + "\n";
    return detail::render_table(to_text_table(m), format);
}

inline TextTable to_text_table(const std::vector<LanguageTotals>& totals) {
    TextTable t;
    t.header = {"System", "Toolchain", "Group", "Pass", "Total"};
    for (const LanguageTotals& x : totals)
        t.rows.push_back({x.system_label, x.toolchain_id, display_label(x.group),
                          std::to_string(x.pass_count), std::to_string(x.denominator)});
    return t;
}

inline std::string render(const std::vector<LanguageTotals>& totals, ReportFormat format) {
    if (format == ReportFormat::json) {
        json arr = json::array();
        for (const LanguageTotals& x : totals)
            arr.push_back({{"system", x.system_label},
                           {"toolchain", x.toolchain_id},
                           {"language_group", to_string(x.group)},
                           {"pass_count", x.pass_count},
                           {"denominator", x.denominator}});
        return arr.dump(2) + "\n";
    }
    return detail::render_table(to_text_table(totals), format);
}

inline TextTable to_text_table(const std::vector<TimeSeriesPoint>& series) {
    TextTable t;
    t.header = {"Date", "System", "Toolchain", "Group", "Pass"};
    for (const TimeSeriesPoint& p : series)
        t.rows.push_back({format_iso8601(p.date), p.system_label, p.toolchain_id,
                          display_label(p.group), std::to_string(p.pass_count)});
    return t;
}

inline std::string render(const std::vector<TimeSeriesPoint>& series, ReportFormat format) {
    if (format == ReportFormat::json) {
        json arr = json::array();
        for (const TimeSeriesPoint& p : series)
            arr.push_back({{"date", format_iso8601(p.date)},
                           {"system", p.system_label},
                           {"toolchain", p.toolchain_id},
                           {"language_group", to_string(p.group)},
                           {"pass_count", p.pass_count}});
        return arr.dump(2) + "\n";
    }
    return detail::render_table(to_text_table(series), format);
}

inline TextTable to_text_table(const BenchTable& t) {
    TextTable out;
    out.header.push_back("Benchmark");
    for (const ColumnKey& c : t.columns) out.header.push_back(c.label());
    for (std::size_t i = 0; i < t.app_ids.size(); ++i) {
        std::vector<std::string> row{t.app_ids[i]};
        row.insert(row.end(), t.cells[i].begin(), t.cells[i].end());
        out.rows.push_back(std::move(row));
    }
    return out;
}

inline std::string render(const BenchTable& t, ReportFormat format) {
    if (format == ReportFormat::json) {
        json columns = json::array();
        for (const ColumnKey& c : t.columns)
            columns.push_back({{"system", c.system_label}, {"toolchain", c.toolchain_id}});
        json rows = json::array();
        for (std::size_t i = 0; i < t.app_ids.size(); ++i)
            rows.push_back({{"app", t.app_ids[i]}, {"cells", t.cells[i]}});
        return json{{"columns", columns}, {"rows", rows}}.dump(2) + "\n";
    }
    return detail::render_table(to_text_table(t), format);
}

// ---------------------------------------------------------------------------
// Snapshot persistence
// ---------------------------------------------------------------------------

inline json to_json(const ResultsSnapshot& s) {
    json outcomes = json::array();
    for (const auto& o : s.outcomes) outcomes.push_back(to_json(o));
    json bench = json::array();
    for (const auto& b : s.bench) bench.push_back(to_json(b));
    return json{{"snapshot_id", s.snapshot_id},
                {"captured_at", format_iso8601(s.captured_at)},
                {"system_label", s.system_label},
                {"commit_pins", s.commit_pins},
                {"outcomes", outcomes},
                {"bench", bench}};
}

inline ResultsSnapshot snapshot_from_json(const json& j) {
    ResultsSnapshot s;
    s.snapshot_id = j.at("snapshot_id").get<std::string>();
    s.captured_at = parse_iso8601(j.at("captured_at").get<std::string>());
    s.system_label = j.at("system_label").get<std::string>();
    if (j.contains("commit_pins"))
        for (auto it = j.at("commit_pins").begin(); it != j.at("commit_pins").end(); ++it)
            s.commit_pins[it.key()] = it.value().get<std::string>();
    for (const auto& e : j.value("outcomes", json::array())) s.outcomes.push_back(test_outcome_from_json(e));
    for (const auto& e : j.value("bench", json::array())) s.bench.push_back(bench_result_from_json(e));
    return s;
}

} // namespace ompforge
