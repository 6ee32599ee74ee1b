#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "coinlens/types.hpp"

namespace coinlens {
namespace csv {

/// Shortest round-trip decimal form of a double (locale-independent).
inline std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_int64(std::string_view s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<std::uint32_t> parse_uint32(std::string_view s) {
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<bool> parse_bool(std::string_view s) {
    if (s == "true") return true;
    if (s == "false") return false;
    return std::nullopt;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = line.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

/// Streams a headered CSV file row by row. The row callback receives the
/// 1-based file line number and the split fields; blank lines are skipped.
/// Throws InputError if the file is missing or the header does not match.
inline void for_each_row(const std::string& path, std::string_view expected_header,
                         const std::function<void(std::size_t, const std::vector<std::string_view>&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot open file");
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!saw_header) {
            if (line != expected_header)
                throw InputError(path + ":1: expected header '" + std::string(expected_header) +
                                 "', got '" + line + "'");
            saw_header = true;
            continue;
        }
        if (line.empty()) continue;
        fn(line_no, split(line));
    }
    if (!saw_header)
        throw InputError(path + ": empty file, expected header '" + std::string(expected_header) + "'");
}

[[noreturn]] inline void fail_row(const std::string& path, std::size_t line_no, const std::string& what) {
    throw InputError(path + ":" + std::to_string(line_no) + ": " + what);
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(path + ": cannot open file for writing");
    out << contents;
    if (!out) throw InputError(path + ": write failed");
}

/// `date,<value_column>` rows for every day of the series; absent values
/// are written as an empty cell.
inline std::string metric_csv(const MetricSeries& series, std::string_view value_column) {
    std::ostringstream out;
    out << "date," << value_column << "\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << format_day(series.date(i)) << ",";
        if (series.values[i]) out << format_double(*series.values[i]);
        out << "\n";
    }
    return out.str();
}

inline MetricSeries load_metric_csv(const std::string& path, std::string_view value_column,
                                    std::string_view name = "") {
    MetricSeries series;
    series.name = std::string(name);
    std::string header = "date," + std::string(value_column);
    bool first = true;
    for_each_row(path, header, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        if (f.size() != 2) fail_row(path, line_no, "expected 2 fields");
        auto d = parse_day(f[0]);
        if (!d) fail_row(path, line_no, "unparseable date '" + std::string(f[0]) + "'");
        if (first) {
            series.start = *d;
            first = false;
        } else if (*d != series.start + static_cast<std::int32_t>(series.values.size())) {
            fail_row(path, line_no, "metric series days must be contiguous");
        }
        if (f[1].empty()) {
            series.values.push_back(std::nullopt);
        } else {
            auto v = parse_double(f[1]);
            if (!v) fail_row(path, line_no, "unparseable value '" + std::string(f[1]) + "'");
            series.values.push_back(*v);
        }
    });
    return series;
}

} // namespace csv
} // namespace coinlens
