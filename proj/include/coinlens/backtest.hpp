#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coinlens/csv.hpp"
#include "coinlens/time.hpp"
#include "coinlens/types.hpp"
#include "coinlens/valuation.hpp"

namespace coinlens {

/// Positions smaller than this are treated as zero when sizing trades.
inline constexpr double kDustUnits = 1e-8;

struct BacktestConfig {
    double initial_capital_usd = 100'000.0;
    double fee_rate = 0.001;
    double trade_cap_units = 100.0;
    double buy_quantile = 0.1;
    double sell_quantile = 0.9;
    int warmup_days = 30;
    std::optional<DayRange> range;

    void validate() const {
        if (!(initial_capital_usd > 0.0)) throw InputError("initial capital must be positive");
        if (!(fee_rate >= 0.0) || fee_rate >= 1.0) throw InputError("fee rate must be in [0, 1)");
        if (!(trade_cap_units > 0.0)) throw InputError("trade cap must be positive");
        if (!(buy_quantile >= 0.0) || !(sell_quantile <= 1.0) || !(buy_quantile < sell_quantile))
            throw InputError("quantiles must satisfy 0 <= buy < sell <= 1");
        if (warmup_days < 1) throw InputError("warmup must be at least 1 observation");
        if (range && !range->valid()) throw InputError("backtest range is empty");
    }
};

enum class Signal { Hold, Buy, Sell };

inline std::string_view side_name(Signal s) {
    switch (s) {
        case Signal::Buy: return "buy";
        case Signal::Sell: return "sell";
        default: return "hold";
    }
}

struct SignalPoint {
    Day date;
    double pu = 0.0;
    Signal signal = Signal::Hold;
};

/// Linear-interpolation quantile of an ascending-sorted sample: rank
/// h = (n - 1) q blended between the neighbouring order statistics.
inline double empirical_quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw InputError("quantile of an empty sample");
    if (!(q >= 0.0) || !(q <= 1.0)) throw InputError("quantile level must be in [0, 1]");
    double h = static_cast<double>(sorted.size() - 1) * q;
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

/// Expanding-window quantile rule over the PU history. Each day is compared
/// against quantiles of strictly earlier PU values only; days with fewer than
/// `warmup_days` prior values stay Hold. A PU at or below the buy
/// quantile buys; otherwise at or above the sell quantile sells. Buy wins if
/// the bands collapse onto each other.
inline std::vector<SignalPoint> generate_signals(const std::vector<PuPoint>& points,
                                                 const BacktestConfig& config = {}) {
    config.validate();
    std::vector<SignalPoint> out;
    out.reserve(points.size());
    std::vector<double> prior; // ascending
    prior.reserve(points.size());
    for (const auto& p : points) {
        SignalPoint sp{p.date, p.pu, Signal::Hold};
        if (prior.size() >= static_cast<std::size_t>(config.warmup_days)) {
            if (p.pu <= empirical_quantile(prior, config.buy_quantile))
                sp.signal = Signal::Buy;
            else if (p.pu >= empirical_quantile(prior, config.sell_quantile))
                sp.signal = Signal::Sell;
        }
        out.push_back(sp);
        prior.insert(std::lower_bound(prior.begin(), prior.end(), p.pu), p.pu);
    }
    return out;
}

struct Trade {
    Day date;
    Signal side = Signal::Buy;
    double units = 0.0;
    double price_usd = 0.0;
    double fee_usd = 0.0;
    double cash_after = 0.0;
    double holdings_after = 0.0;
};

struct BacktestResult {
    std::vector<Trade> trades;
    MetricSeries equity; // one point per market day in range
    double initial_capital_usd = 0.0;
    double final_cash_usd = 0.0;
    double final_holdings_units = 0.0;
    double final_equity_usd = 0.0;
    double roi_percent = 0.0;
    std::optional<double> sharpe_annualized;
};

inline double roi(const BacktestResult& result) {
    return (result.final_equity_usd - result.initial_capital_usd) / result.initial_capital_usd *
           100.0;
}

/// Annualised Sharpe ratio (zero risk-free rate) of the daily simple returns
/// between consecutive marked equity points. Undefined with fewer than two
/// returns or zero return dispersion.
inline std::optional<double> sharpe_annualized(const MetricSeries& equity) {
    std::vector<double> marks;
    for (const auto& v : equity.values)
        if (v) marks.push_back(*v);
    if (marks.size() < 3) return std::nullopt;
    std::vector<double> returns;
    returns.reserve(marks.size() - 1);
    for (std::size_t i = 1; i < marks.size(); ++i)
        returns.push_back(marks[i] / marks[i - 1] - 1.0);
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= static_cast<double>(returns.size());
    double ss = 0.0;
    for (double r : returns) ss += (r - mean) * (r - mean);
    double sd = std::sqrt(ss / static_cast<double>(returns.size() - 1));
    if (!(sd > 0.0)) return std::nullopt;
    return mean / sd * std::sqrt(static_cast<double>(kDaysPerYear));
}

/// Executes signals against daily closes. Buys spend cash on up to
/// `trade_cap_units` units (fee charged on notional, deducted from cash);
/// sells liquidate up to the cap from holdings. All fills happen at the
/// signal day's close and equity is marked at that close after the fill.
/// A Buy or Sell dated inside the range on a day without a price is an
/// error; signals outside the range are ignored.
inline BacktestResult run_backtest(const std::vector<SignalPoint>& signals,
                                   const MarketSeries& market,
                                   const BacktestConfig& config = {}) {
    config.validate();
    if (market.empty()) throw InputError("backtest needs a price series");

    DayRange span{market.date(0), market.date(market.size() - 1)};
    if (config.range) {
        span.first = std::max(span.first, config.range->first);
        span.last = std::min(span.last, config.range->last);
    }
    if (!span.valid()) throw InputError("backtest range does not overlap the price series");

    std::map<Day, Signal> pending;
    for (const auto& s : signals) {
        if (s.signal == Signal::Hold || !span.contains(s.date)) continue;
        if (!pending.emplace(s.date, s.signal).second)
            throw InputError("duplicate signal on " + format_day(s.date));
    }

    BacktestResult result;
    result.initial_capital_usd = config.initial_capital_usd;
    result.equity.name = "equity_usd";
    result.equity.start = span.first;
    result.equity.values.assign(static_cast<std::size_t>(span.length()), std::nullopt);

    double cash = config.initial_capital_usd;
    double holdings = 0.0;
    for (std::size_t i = 0; i < market.size(); ++i) {
        Day d = market.date(i);
        if (d < span.first || d > span.last) continue;
        double price = market.close(i);
        auto it = pending.find(d);
        if (it != pending.end()) {
            Signal side = it->second;
            pending.erase(it);
            double units = 0.0;
            if (side == Signal::Buy) {
                double affordable = cash / (price * (1.0 + config.fee_rate));
                units = std::min(config.trade_cap_units, affordable);
                if (units > kDustUnits) {
                    double fee = units * price * config.fee_rate;
                    cash -= units * price * (1.0 + config.fee_rate);
                    holdings += units;
                    result.trades.push_back(
                        Trade{d, side, units, price, fee, cash, holdings});
                }
            } else {
                units = std::min(config.trade_cap_units, holdings);
                if (units > kDustUnits) {
                    double fee = units * price * config.fee_rate;
                    cash += units * price * (1.0 - config.fee_rate);
                    holdings -= units;
                    result.trades.push_back(
                        Trade{d, side, units, price, fee, cash, holdings});
                }
            }
        }
        result.equity.values[static_cast<std::size_t>(d - span.first)] = cash + holdings * price;
    }
    if (!pending.empty())
        throw InputError("no price for signal on " + format_day(pending.begin()->first));

    result.final_cash_usd = cash;
    result.final_holdings_units = holdings;
    result.final_equity_usd = config.initial_capital_usd;
    for (auto it = result.equity.values.rbegin(); it != result.equity.values.rend(); ++it)
        if (*it) {
            result.final_equity_usd = **it;
            break;
        }
    result.roi_percent = roi(result);
    result.sharpe_annualized = sharpe_annualized(result.equity);
    return result;
}

/// Baseline: a single buy at the first close in range, held to the end.
/// Runs through the same executor, so the trade cap and fee apply.
inline BacktestResult buy_and_hold(const MarketSeries& market, const BacktestConfig& config = {}) {
    config.validate();
    if (market.empty()) throw InputError("backtest needs a price series");
    Day first = market.date(0);
    if (config.range) {
        auto rows = market.dates();
        auto it = std::lower_bound(rows.begin(), rows.end(), config.range->first);
        if (it == rows.end() || *it > config.range->last)
            throw InputError("backtest range does not overlap the price series");
        first = *it;
    }
    std::vector<SignalPoint> signals{SignalPoint{first, 0.0, Signal::Buy}};
    return run_backtest(signals, market, config);
}

/// Baseline: moving-average crossover on closes. Averages run over series
/// rows, not calendar days. A strict sign change of (short MA - long MA)
/// buys on upward crossings and sells on downward ones.
inline BacktestResult ma_crossover(const MarketSeries& market, const BacktestConfig& config = {},
                                   int short_window = 20, int long_window = 50) {
    if (short_window < 1 || long_window <= short_window)
        throw InputError("moving-average windows must satisfy 0 < short < long");
    if (market.empty()) throw InputError("backtest needs a price series");

    auto sma = [&](std::size_t end_pos, int window) {
        double sum = 0.0;
        for (std::size_t i = end_pos + 1 - static_cast<std::size_t>(window); i <= end_pos; ++i)
            sum += market.close(i);
        return sum / window;
    };

    std::vector<SignalPoint> signals;
    std::optional<double> prev_diff;
    for (std::size_t i = static_cast<std::size_t>(long_window) - 1; i < market.size(); ++i) {
        double diff = sma(i, short_window) - sma(i, long_window);
        if (prev_diff) {
            Signal side = Signal::Hold;
            if (*prev_diff <= 0.0 && diff > 0.0)
                side = Signal::Buy;
            else if (*prev_diff >= 0.0 && diff < 0.0)
                side = Signal::Sell;
            if (side != Signal::Hold)
                signals.push_back(SignalPoint{market.date(i), diff, side});
        }
        prev_diff = diff;
    }
    return run_backtest(signals, market, config);
}

inline constexpr std::string_view kTradesHeader =
    "date,side,units,price_usd,fee_usd,cash_after,holdings_after";

inline std::string trades_csv(const std::vector<Trade>& trades) {
    std::ostringstream out;
    out << kTradesHeader << "\n";
    for (const auto& t : trades) {
        out << format_day(t.date) << ',' << side_name(t.side) << ','
            << csv::format_double(t.units) << ',' << csv::format_double(t.price_usd) << ','
            << csv::format_double(t.fee_usd) << ',' << csv::format_double(t.cash_after) << ','
            << csv::format_double(t.holdings_after) << "\n";
    }
    return out.str();
}

inline void write_trades(const std::string& path, const std::vector<Trade>& trades) {
    csv::write_file(path, trades_csv(trades));
}

inline void write_equity(const std::string& path, const BacktestResult& result) {
    csv::write_file(path, csv::metric_csv(result.equity, "equity_usd"));
}

inline nlohmann::json summary_json(const BacktestResult& result, const BacktestConfig& config,
                                   std::string_view strategy) {
    nlohmann::json j;
    j["strategy"] = strategy;
    j["roi_percent"] = result.roi_percent;
    if (result.sharpe_annualized)
        j["sharpe_annualized"] = *result.sharpe_annualized;
    else
        j["sharpe_annualized"] = nullptr;
    j["trade_count"] = result.trades.size();
    j["final_equity_usd"] = result.final_equity_usd;
    j["final_cash_usd"] = result.final_cash_usd;
    j["final_holdings_units"] = result.final_holdings_units;
    j["config"] = {
        {"initial_capital_usd", config.initial_capital_usd},
        {"fee_rate", config.fee_rate},
        {"trade_cap_units", config.trade_cap_units},
        {"buy_quantile", config.buy_quantile},
        {"sell_quantile", config.sell_quantile},
        {"warmup_days", config.warmup_days},
    };
    if (config.range) {
        j["config"]["from"] = format_day(config.range->first);
        j["config"]["to"] = format_day(config.range->last);
    }
    return j;
}

} // namespace coinlens
