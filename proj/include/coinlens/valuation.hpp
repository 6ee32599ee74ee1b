#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "coinlens/cohorts.hpp"
#include "coinlens/csv.hpp"
#include "coinlens/replay.hpp"
#include "coinlens/types.hpp"

namespace coinlens {

/// Value spent on `date` divided by the issued supply at that date, both in
/// coins. Undefined while nothing has been issued.
inline std::optional<double> token_velocity(const LedgerTimeline& timeline,
                                            const MetricSeries& supply, Day date) {
    const DailySnapshot* snap = timeline.snapshot(date);
    auto supply_coins = supply.at(date);
    if (!snap || !supply_coins || !(*supply_coins > 0.0)) return std::nullopt;
    return to_coins(snap->spent_today_value()) / *supply_coins;
}

inline MetricSeries velocity_series(const LedgerTimeline& timeline, const MetricSeries& supply) {
    MetricSeries series;
    series.name = "velocity";
    series.start = timeline.range.first;
    series.values.reserve(timeline.days.size());
    for (const auto& snap : timeline.days)
        series.values.push_back(token_velocity(timeline, supply, snap.date));
    return series;
}

/// Trailing one-year supply growth rate. Undefined until a full year of
/// supply history exists.
inline std::optional<double> dilution_rate(const MetricSeries& supply, Day date) {
    auto now = supply.at(date);
    auto base = supply.at(date - static_cast<std::int32_t>(kDaysPerYear));
    if (!now || !base || !(*base > 0.0)) return std::nullopt;
    return *now / *base - 1.0;
}

inline MetricSeries dilution_series(const MetricSeries& supply) {
    MetricSeries series;
    series.name = "dilution";
    series.start = supply.start;
    series.values.reserve(supply.size());
    for (std::size_t i = 0; i < supply.size(); ++i)
        series.values.push_back(dilution_rate(supply, supply.date(i)));
    return series;
}

/// Sample standard deviation of the `window_days` daily log returns ending at
/// `date`. Needs window_days + 1 consecutive series entries ending exactly at
/// `date`; calendar gaps between entries are treated as adjacent sessions.
inline std::optional<double> price_volatility(const MarketSeries& market, Day date,
                                              int window_days = 30) {
    if (window_days < 2) throw InputError("volatility window must be at least 2 days");
    auto pos = market.index_of(date);
    if (!pos || *pos < static_cast<std::size_t>(window_days)) return std::nullopt;
    const std::size_t end = *pos;
    const std::size_t begin = end - static_cast<std::size_t>(window_days);
    double mean = 0.0;
    for (std::size_t i = begin + 1; i <= end; ++i)
        mean += std::log(market.close(i) / market.close(i - 1));
    mean /= window_days;
    double ss = 0.0;
    for (std::size_t i = begin + 1; i <= end; ++i) {
        double r = std::log(market.close(i) / market.close(i - 1)) - mean;
        ss += r * r;
    }
    return std::sqrt(ss / (window_days - 1));
}

/// Per-day inputs of the token-utility formula; absent parts mark days where
/// an estimator is undefined.
struct UtilityInputs {
    Day date;
    std::optional<double> velocity;
    std::optional<double> staking_ratio;
    std::optional<double> volatility;
    std::optional<double> dilution;

    bool complete() const { return velocity && staking_ratio && volatility && dilution; }
};

struct UtilityParams {
    int volatility_window_days = 30;
    double epsilon_volatility = 1e-6;
    double epsilon_dilution = 1e-6;
};

/// (velocity * staking_ratio) / (max(volatility, eps) * max(dilution, eps)).
/// Undefined unless all four inputs are present.
inline std::optional<double> token_utility(const UtilityInputs& inputs,
                                           const UtilityParams& params = {}) {
    if (!inputs.complete()) return std::nullopt;
    double vol = std::max(*inputs.volatility, params.epsilon_volatility);
    double dil = std::max(*inputs.dilution, params.epsilon_dilution);
    return (*inputs.velocity * *inputs.staking_ratio) / (vol * dil);
}

/// True when the utility denominator of `inputs` hit a floor.
inline bool utility_floored(const UtilityInputs& inputs, const UtilityParams& params = {}) {
    return inputs.complete() && (*inputs.volatility < params.epsilon_volatility ||
                                 *inputs.dilution < params.epsilon_dilution);
}

enum class Zone { Undervalued, Normal, Overvalued };

inline std::string_view zone_name(Zone z) {
    switch (z) {
        case Zone::Undervalued: return "Undervalued";
        case Zone::Overvalued: return "Overvalued";
        default: return "Normal";
    }
}

inline std::optional<Zone> parse_zone(std::string_view s) {
    if (s == "Undervalued") return Zone::Undervalued;
    if (s == "Normal") return Zone::Normal;
    if (s == "Overvalued") return Zone::Overvalued;
    return std::nullopt;
}

/// PU bands. The boundaries themselves count as Normal.
struct ZoneThresholds {
    double undervalued_below = 60.0;
    double overvalued_above = 100.0;
};

inline Zone valuation_zone(double pu, const ZoneThresholds& thresholds = {}) {
    if (pu > thresholds.overvalued_above) return Zone::Overvalued;
    if (pu < thresholds.undervalued_below) return Zone::Undervalued;
    return Zone::Normal;
}

struct PuPoint {
    Day date;
    double price_usd = 0.0;
    double token_utility = 0.0;
    double pu = 0.0;
    Zone zone = Zone::Normal;
};

/// Price divided by token utility on every day both are defined and the
/// utility is positive; other days emit no point.
inline std::vector<PuPoint> pu_series(const MarketSeries& market, const MetricSeries& utility,
                                      const ZoneThresholds& thresholds = {}) {
    std::vector<PuPoint> out;
    for (std::size_t i = 0; i < market.size(); ++i) {
        auto tu = utility.at(market.date(i));
        if (!tu || !(*tu > 0.0)) continue;
        PuPoint p;
        p.date = market.date(i);
        p.price_usd = market.close(i);
        p.token_utility = *tu;
        p.pu = p.price_usd / p.token_utility;
        p.zone = valuation_zone(p.pu, thresholds);
        out.push_back(p);
    }
    return out;
}

/// One exported valuation row; only days with a defined, positive utility
/// produce rows, so every field is set.
struct ValuationRow {
    Day date;
    double price_usd = 0.0;
    double velocity = 0.0;
    double staking_ratio = 0.0;
    double volatility = 0.0;
    double dilution = 0.0;
    double token_utility = 0.0;
    double pu = 0.0;
    Zone zone = Zone::Normal;
    bool floored = false;
};

/// Runs the full valuation pipeline over the timeline/market intersection.
/// Metrics are computed from the whole replayed history even when the
/// timeline range is wider than the market series.
inline std::vector<ValuationRow> compute_valuation(const LedgerTimeline& timeline,
                                                   const MarketSeries& market,
                                                   const UtilityParams& params = {},
                                                   const ZoneThresholds& thresholds = {},
                                                   const AgeBinning& binning = {}) {
    MetricSeries supply = supply_series(timeline);
    MetricSeries velocity = velocity_series(timeline, supply);
    MetricSeries staking = staking_series(timeline, binning);
    MetricSeries dilution = dilution_series(supply);

    std::vector<ValuationRow> rows;
    for (std::size_t i = 0; i < market.size(); ++i) {
        Day d = market.date(i);
        UtilityInputs inputs;
        inputs.date = d;
        inputs.velocity = velocity.at(d);
        inputs.staking_ratio = staking.at(d);
        inputs.volatility = price_volatility(market, d, params.volatility_window_days);
        inputs.dilution = dilution.at(d);
        auto tu = token_utility(inputs, params);
        if (!tu || !(*tu > 0.0)) continue;
        ValuationRow row;
        row.date = d;
        row.price_usd = market.close(i);
        row.velocity = *inputs.velocity;
        row.staking_ratio = *inputs.staking_ratio;
        row.volatility = *inputs.volatility;
        row.dilution = *inputs.dilution;
        row.token_utility = *tu;
        row.pu = row.price_usd / row.token_utility;
        row.zone = valuation_zone(row.pu, thresholds);
        row.floored = utility_floored(inputs, params);
        rows.push_back(row);
    }
    return rows;
}

/// Token-utility values aligned to the market series days (absent where
/// undefined); feeds pu_series.
inline MetricSeries utility_series(const LedgerTimeline& timeline, const MarketSeries& market,
                                   const UtilityParams& params = {}, const AgeBinning& binning = {}) {
    MetricSeries supply = supply_series(timeline);
    MetricSeries velocity = velocity_series(timeline, supply);
    MetricSeries staking = staking_series(timeline, binning);
    MetricSeries dilution = dilution_series(supply);

    MetricSeries series;
    series.name = "token_utility";
    if (market.empty()) return series;
    series.start = market.date(0);
    series.values.assign(static_cast<std::size_t>(market.date(market.size() - 1) - series.start) + 1,
                         std::nullopt);
    for (std::size_t i = 0; i < market.size(); ++i) {
        Day d = market.date(i);
        UtilityInputs inputs;
        inputs.date = d;
        inputs.velocity = velocity.at(d);
        inputs.staking_ratio = staking.at(d);
        inputs.volatility = price_volatility(market, d, params.volatility_window_days);
        inputs.dilution = dilution.at(d);
        series.values[static_cast<std::size_t>(d - series.start)] = token_utility(inputs, params);
    }
    return series;
}

inline constexpr std::string_view kPuHeader =
    "date,price_usd,velocity,staking_ratio,volatility,dilution,token_utility,pu,zone,floored";

inline std::string pu_csv(const std::vector<ValuationRow>& rows) {
    std::ostringstream out;
    out << kPuHeader << "\n";
    for (const auto& r : rows) {
        out << format_day(r.date) << ',' << csv::format_double(r.price_usd) << ','
            << csv::format_double(r.velocity) << ',' << csv::format_double(r.staking_ratio) << ','
            << csv::format_double(r.volatility) << ',' << csv::format_double(r.dilution) << ','
            << csv::format_double(r.token_utility) << ',' << csv::format_double(r.pu) << ','
            << zone_name(r.zone) << ',' << (r.floored ? "true" : "false") << "\n";
    }
    return out.str();
}

inline void write_pu_series(const std::string& path, const std::vector<ValuationRow>& rows) {
    csv::write_file(path, pu_csv(rows));
}

inline std::vector<ValuationRow> load_pu_series(const std::string& path) {
    std::vector<ValuationRow> rows;
    csv::for_each_row(path, kPuHeader, [&](std::size_t ln, const std::vector<std::string_view>& f) {
        if (f.size() != 10) csv::fail_row(path, ln, "expected 10 fields");
        ValuationRow r;
        auto d = parse_day(f[0]);
        if (!d) csv::fail_row(path, ln, "unparseable date '" + std::string(f[0]) + "'");
        r.date = *d;
        const char* names[] = {"price_usd", "velocity", "staking_ratio", "volatility",
                               "dilution",  "token_utility", "pu"};
        double* slots[] = {&r.price_usd, &r.velocity, &r.staking_ratio, &r.volatility,
                           &r.dilution,  &r.token_utility, &r.pu};
        for (std::size_t i = 0; i < 7; ++i) {
            auto v = csv::parse_double(f[i + 1]);
            if (!v) csv::fail_row(path, ln, std::string("unparseable ") + names[i]);
            *slots[i] = *v;
        }
        auto zone = parse_zone(f[8]);
        if (!zone) csv::fail_row(path, ln, "unknown zone '" + std::string(f[8]) + "'");
        r.zone = *zone;
        auto floored = csv::parse_bool(f[9]);
        if (!floored) csv::fail_row(path, ln, "floored must be true or false");
        r.floored = *floored;
        if (!rows.empty() && r.date <= rows.back().date)
            csv::fail_row(path, ln, "dates must be strictly increasing");
        rows.push_back(r);
    });
    return rows;
}

/// PU points view of loaded valuation rows.
inline std::vector<PuPoint> pu_points(const std::vector<ValuationRow>& rows) {
    std::vector<PuPoint> out;
    out.reserve(rows.size());
    for (const auto& r : rows)
        out.push_back(PuPoint{r.date, r.price_usd, r.token_utility, r.pu, r.zone});
    return out;
}

} // namespace coinlens
