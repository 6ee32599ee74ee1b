#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "coinlens/cohorts.hpp"
#include "coinlens/time.hpp"
#include "coinlens/types.hpp"

namespace coinlens {

/// Reference daily metrics recomputed the slow way. Everything below rescans
/// the full record set for every day and works in plain double coin amounts,
/// so it shares no state or arithmetic with the incremental engine and is
/// only meant for cross-checking it on small data sets.
struct OracleDaily {
    Day date;
    double utxo_total_coins = 0.0;
    std::int64_t utxo_count = 0;
    double issued_coins = 0.0;
    double spent_today_coins = 0.0;
    std::array<double, AgeBinning::kBinCount> utxo_shares{};
    std::array<double, AgeBinning::kBinCount> stxo_shares{};
    std::optional<double> wal_years;
    double cdd = 0.0;
    std::optional<double> velocity;
    std::optional<double> staking_ratio;
};

inline std::vector<OracleDaily> oracle_metrics(std::span<const OutputRecord> records,
                                               DayRange range, const AgeBinning& binning = {}) {
    std::vector<OracleDaily> out;
    if (!range.valid()) return out;

    auto bin_index = [&](double age_seconds) {
        int b = 0;
        while (b < static_cast<int>(AgeBinning::kBinCount) - 1 &&
               age_seconds >= binning.boundaries_days[b] * 86400.0)
            ++b;
        return b;
    };

    for (Day d = range.first; d <= range.last; ++d) {
        const double end = (static_cast<double>(d.index) + 1.0) * 86400.0;
        const double begin = end - 86400.0;
        OracleDaily row;
        row.date = d;

        std::array<double, AgeBinning::kBinCount> utxo_value{};
        std::array<double, AgeBinning::kBinCount> stxo_value{};
        double staked = 0.0;
        double wal_num = 0.0;
        double wal_den = 0.0;

        for (const auto& r : records) {
            double coins = static_cast<double>(r.value) / 1e8;
            double created = static_cast<double>(r.created_at);
            if (created < end && r.is_coinbase) row.issued_coins += coins;

            bool live = created < end &&
                        (!r.spent_at || static_cast<double>(*r.spent_at) >= end);
            if (live) {
                row.utxo_total_coins += coins;
                row.utxo_count += 1;
                double age = end - created;
                utxo_value[static_cast<std::size_t>(bin_index(age))] += coins;
                if (age > 365.0 * 86400.0) staked += coins;
            }

            if (r.spent_at) {
                double spent = static_cast<double>(*r.spent_at);
                if (spent >= begin && spent < end) {
                    double lifespan = spent - created;
                    row.spent_today_coins += coins;
                    stxo_value[static_cast<std::size_t>(bin_index(lifespan))] += coins;
                    wal_num += coins * lifespan;
                    wal_den += coins;
                    row.cdd += coins * (lifespan / 86400.0);
                }
            }
        }

        if (row.utxo_total_coins > 0.0) {
            for (std::size_t b = 0; b < AgeBinning::kBinCount; ++b)
                row.utxo_shares[b] = utxo_value[b] / row.utxo_total_coins;
            row.staking_ratio = staked / row.utxo_total_coins;
        }
        if (row.spent_today_coins > 0.0)
            for (std::size_t b = 0; b < AgeBinning::kBinCount; ++b)
                row.stxo_shares[b] = stxo_value[b] / row.spent_today_coins;
        if (wal_den > 0.0) row.wal_years = (wal_num / wal_den) / (365.0 * 86400.0);
        if (row.issued_coins > 0.0) row.velocity = row.spent_today_coins / row.issued_coins;
        out.push_back(row);
    }
    return out;
}

} // namespace coinlens
