// Minimal library tour: generate a synthetic chain, replay it, and print a
// few of the daily metrics plus a toy backtest.

#include <iostream>

#include "coinlens/coinlens.hpp"

using namespace coinlens;

int main() {
    SyntheticChainConfig chain_cfg;
    chain_cfg.seed = 7;
    chain_cfg.days = 400;
    chain_cfg.spender_fraction = 0.7;
    chain_cfg.holding = HoldingTimeDistribution::bimodal(5.0, 200.0, 0.4);

    auto txs = generate_chain(chain_cfg);
    auto records = match_spends(txs);
    DayRange range{Day{0}, Day{chain_cfg.days - 1}};
    LedgerTimeline timeline = daily_snapshots(records, range);

    MetricSeries supply = supply_series(timeline);
    MetricSeries wal = wal_series(timeline);
    MetricSeries staking = staking_series(timeline);

    Day last = range.last;
    std::cout << "chain: " << txs.size() << " transactions, " << records.size() << " outputs\n";
    std::cout << "supply on " << format_day(last) << ": " << *supply.at(last) << " coins\n";
    if (auto w = wal.at(last)) std::cout << "weighted average lifespan: " << *w << " years\n";
    if (auto s = staking.at(last)) std::cout << "staking ratio: " << *s << "\n";

    // A made-up price path over the same days, just to exercise the backtest.
    MarketSeries market;
    for (int i = 0; i < chain_cfg.days; ++i)
        market.append(Day{i}, 100.0 + 20.0 * ((i * 37) % 100) / 100.0);

    auto rows = compute_valuation(timeline, market);
    auto signals = generate_signals(pu_points(rows));
    BacktestConfig bt;
    auto result = run_backtest(signals, market, bt);
    std::cout << "pu rows: " << rows.size() << ", trades: " << result.trades.size()
              << ", roi: " << result.roi_percent << "%\n";
    return 0;
}
