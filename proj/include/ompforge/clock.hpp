#pragma once

#include "ompforge/errors.hpp"

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <string>

namespace ompforge {

// Unix time in whole seconds (UTC). Durations elsewhere are doubles.
using Timestamp = std::int64_t;

// Time source abstraction. Pipelines, snapshots, and green lists stamp
// themselves through one of these so tests and reruns can pin the clock
// and get byte-identical artifacts.
class Clock {
public:
    virtual ~Clock() = default;
    virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
public:
    Timestamp now() const override { return static_cast<Timestamp>(std::time(nullptr)); }
};

class FixedClock final : public Clock {
public:
    explicit FixedClock(Timestamp at) : at_(at) {}
    Timestamp now() const override { return at_; }

private:
    Timestamp at_;
};

// "2026-08-10T12:00:00Z"
inline std::string format_iso8601(Timestamp ts) {
    std::time_t t = static_cast<std::time_t>(ts);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

// Compact form used in generated ids and file names.
inline std::string format_compact_utc(Timestamp ts) {
    std::time_t t = static_cast<std::time_t>(ts);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%04d%02d%02dT%02d%02d%02dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

inline Timestamp parse_iso8601(const std::string& text) {
    std::tm tm{};
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%dZ", &y, &mo, &d, &h, &mi, &s) != 6)
        throw SyntaxError("invalid ISO-8601 UTC timestamp: '" + text + "' (expected YYYY-MM-DDThh:mm:ssZ)");
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    return static_cast<Timestamp>(timegm(&tm));
}

} // namespace ompforge
