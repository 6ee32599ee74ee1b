#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace coinlens {

/// Seconds since the UNIX epoch, UTC.
using Timestamp = std::int64_t;

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kDaysPerYear = 365;
inline constexpr std::int64_t kSecondsPerYear = kSecondsPerDay * kDaysPerYear;

/// A UTC calendar day, counted in days since 1970-01-01.
struct Day {
    std::int32_t index = 0;

    friend auto operator<=>(const Day&, const Day&) = default;

    Day& operator++() { ++index; return *this; }
    Day& operator--() { --index; return *this; }
    friend Day operator+(Day d, std::int32_t n) { return Day{d.index + n}; }
    friend Day operator-(Day d, std::int32_t n) { return Day{d.index - n}; }
    friend std::int32_t operator-(Day a, Day b) { return a.index - b.index; }
};

/// Calendar day containing a timestamp (floor toward -inf for pre-epoch times).
inline Day day_of(Timestamp ts) {
    std::int64_t d = ts / kSecondsPerDay;
    if (ts < 0 && ts % kSecondsPerDay != 0) --d;
    return Day{static_cast<std::int32_t>(d)};
}

/// First second of the day.
inline Timestamp day_start(Day d) { return static_cast<Timestamp>(d.index) * kSecondsPerDay; }

/// First second of the following day; ages are measured against this instant.
inline Timestamp day_end(Day d) { return day_start(d) + kSecondsPerDay; }

/// Inclusive interval of calendar days.
struct DayRange {
    Day first;
    Day last;

    bool valid() const { return first <= last; }
    std::int64_t length() const { return static_cast<std::int64_t>(last - first) + 1; }
    bool contains(Day d) const { return first <= d && d <= last; }
};

namespace detail {

inline bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

inline std::optional<std::int32_t> civil_to_day_index(int y, int m, int d) {
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count());
}

} // namespace detail

/// Parses `YYYY-MM-DD`.
inline std::optional<Day> parse_day(std::string_view s) {
    int y, m, d;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (!detail::parse_fixed_uint(s, 0, 4, y) || !detail::parse_fixed_uint(s, 5, 2, m) ||
        !detail::parse_fixed_uint(s, 8, 2, d))
        return std::nullopt;
    auto idx = detail::civil_to_day_index(y, m, d);
    if (!idx) return std::nullopt;
    return Day{*idx};
}

/// Parses `YYYY-MM-DDThh:mm:ssZ` or plain integer UNIX seconds.
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.size() == 20 && s[10] == 'T' && s[19] == 'Z') {
        auto day = parse_day(s.substr(0, 10));
        if (!day) return std::nullopt;
        int hh, mm, ss;
        if (s[13] != ':' || s[16] != ':') return std::nullopt;
        if (!detail::parse_fixed_uint(s, 11, 2, hh) || !detail::parse_fixed_uint(s, 14, 2, mm) ||
            !detail::parse_fixed_uint(s, 17, 2, ss))
            return std::nullopt;
        if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
        return day_start(*day) + hh * 3600 + mm * 60 + ss;
    }
    Timestamp v = 0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
}

inline std::string format_day(Day d) {
    using namespace std::chrono;
    year_month_day ymd{sys_days{days{d.index}}};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

inline std::string format_timestamp(Timestamp ts) {
    Day d = day_of(ts);
    std::int64_t rem = ts - day_start(d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "T%02d:%02d:%02dZ", static_cast<int>(rem / 3600),
                  static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60));
    return format_day(d) + buf;
}

} // namespace coinlens
