#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "coinlens/csv.hpp"
#include "coinlens/replay.hpp"
#include "coinlens/types.hpp"

namespace coinlens {

/// Seven age/lifespan bins: <1d, 1d-1mo, 1mo-1y, 1y-2y, 2y-5y, 5y-10y, >10y.
/// Boundaries are in days; a bin covers [lower, upper) measured in seconds.
struct AgeBinning {
    std::array<std::int32_t, 6> boundaries_days{1, 30, 365, 730, 1825, 3650};

    static constexpr std::size_t kBinCount = 7;

    static const std::array<std::string_view, kBinCount>& labels() {
        static const std::array<std::string_view, kBinCount> names{
            "bin_lt1d", "bin_1d_1mo", "bin_1mo_1y", "bin_1y_2y",
            "bin_2y_5y", "bin_5y_10y", "bin_gt10y"};
        return names;
    }

    bool valid() const {
        for (std::size_t i = 0; i + 1 < boundaries_days.size(); ++i)
            if (boundaries_days[i] >= boundaries_days[i + 1]) return false;
        return boundaries_days[0] > 0;
    }

    std::size_t bin_of_seconds(std::int64_t age_seconds) const {
        std::size_t b = 0;
        while (b < boundaries_days.size() &&
               age_seconds >= static_cast<std::int64_t>(boundaries_days[b]) * kSecondsPerDay)
            ++b;
        return b;
    }

    /// The one-year boundary used by the staking-ratio cutoff.
    std::int64_t year_boundary_seconds() const {
        return static_cast<std::int64_t>(boundaries_days[2]) * kSecondsPerDay;
    }
};

struct DailyAgeDistribution {
    enum class Kind { UtxoAge, StxoLifespan };

    Day date;
    Kind kind = Kind::UtxoAge;
    std::array<double, AgeBinning::kBinCount> shares{};
    Amount total_value = 0;
};

namespace detail {

/// Prefix-sum tree over record positions, weighted by live output value.
class FenwickTree {
public:
    explicit FenwickTree(std::size_t n) : tree_(n + 1, 0) {}

    void add(std::size_t i, Amount delta) {
        for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
    }

    /// Sum of weights at positions [0, n).
    Amount prefix(std::size_t n) const {
        Amount s = 0;
        for (; n > 0; n -= n & (~n + 1)) s += tree_[n];
        return s;
    }

private:
    std::vector<Amount> tree_;
};

/// Count of records with created_at <= cutoff; records are sorted by created_at.
inline std::size_t created_upper_bound(const std::vector<OutputRecord>& records, Timestamp cutoff) {
    auto it = std::upper_bound(records.begin(), records.end(), cutoff,
                               [](Timestamp t, const OutputRecord& r) { return t < r.created_at; });
    return static_cast<std::size_t>(it - records.begin());
}

} // namespace detail

/// Per-day value totals of the live UTXO set, bucketed by age, plus the
/// staked portion (age strictly greater than the one-year boundary).
struct UtxoCohortDay {
    Day date;
    std::array<Amount, AgeBinning::kBinCount> bin_value{};
    Amount staked_value = 0;
    Amount total_value = 0;
};

/// Walks the timeline once, maintaining the live set in a value-weighted
/// Fenwick tree keyed by record position; per-day bin totals fall out of
/// prefix sums at the bin cutoffs. Cost O((records + days*bins) log records).
inline std::vector<UtxoCohortDay> utxo_cohorts(const LedgerTimeline& timeline,
                                               const AgeBinning& binning = {}) {
    if (!binning.valid()) throw InputError("age bin boundaries must be strictly increasing");
    const auto& records = timeline.records;
    detail::FenwickTree live(records.size());

    // Seed outputs born before the range whose death, if any, falls in or after it.
    Day before = timeline.range.first - 1;
    std::size_t preborn = timeline.days.empty() ? 0 : timeline.days.front().created_begin;
    for (std::size_t i = 0; i < preborn; ++i) {
        const auto& r = records[i];
        if (!r.spent_at || day_of(*r.spent_at) > before) live.add(i, r.value);
    }

    std::vector<UtxoCohortDay> out;
    out.reserve(timeline.days.size());
    for (const auto& snap : timeline.days) {
        for (std::size_t i = snap.created_begin; i < snap.created_end; ++i)
            live.add(i, records[i].value);
        for (const auto& e : snap.spent_today) live.add(e.record_index, -e.value);

        UtxoCohortDay day;
        day.date = snap.date;
        const Timestamp end = day_end(snap.date);
        // cut[k] = live value with age >= boundary k (boundary 0 = 0 seconds).
        std::array<Amount, AgeBinning::kBinCount> cut{};
        cut[0] = live.prefix(detail::created_upper_bound(records, end));
        for (std::size_t k = 0; k < binning.boundaries_days.size(); ++k) {
            Timestamp cutoff = end - static_cast<std::int64_t>(binning.boundaries_days[k]) * kSecondsPerDay;
            cut[k + 1] = live.prefix(detail::created_upper_bound(records, cutoff));
        }
        for (std::size_t k = 0; k + 1 < AgeBinning::kBinCount; ++k)
            day.bin_value[k] = cut[k] - cut[k + 1];
        day.bin_value[AgeBinning::kBinCount - 1] = cut[AgeBinning::kBinCount - 1];
        day.total_value = cut[0];
        day.staked_value =
            live.prefix(detail::created_upper_bound(records, end - binning.year_boundary_seconds() - 1));
        out.push_back(day);
    }
    return out;
}

namespace detail {

inline DailyAgeDistribution to_distribution(Day date, DailyAgeDistribution::Kind kind,
                                            const std::array<Amount, AgeBinning::kBinCount>& bins,
                                            Amount total) {
    DailyAgeDistribution dist;
    dist.date = date;
    dist.kind = kind;
    dist.total_value = total;
    if (total > 0)
        for (std::size_t k = 0; k < bins.size(); ++k)
            dist.shares[k] = static_cast<double>(bins[k]) / static_cast<double>(total);
    return dist;
}

} // namespace detail

/// Value-weighted age composition of the live UTXO set at the end of each day.
inline std::vector<DailyAgeDistribution> utxo_age_distribution(const LedgerTimeline& timeline,
                                                               const AgeBinning& binning = {}) {
    std::vector<DailyAgeDistribution> out;
    for (const auto& day : utxo_cohorts(timeline, binning))
        out.push_back(detail::to_distribution(day.date, DailyAgeDistribution::Kind::UtxoAge,
                                              day.bin_value, day.total_value));
    return out;
}

/// Value-weighted lifespan composition of each day's spent outputs.
inline std::vector<DailyAgeDistribution> stxo_lifespan_distribution(const LedgerTimeline& timeline,
                                                                    const AgeBinning& binning = {}) {
    if (!binning.valid()) throw InputError("age bin boundaries must be strictly increasing");
    std::vector<DailyAgeDistribution> out;
    out.reserve(timeline.days.size());
    for (const auto& snap : timeline.days) {
        std::array<Amount, AgeBinning::kBinCount> bins{};
        Amount total = 0;
        for (const auto& e : snap.spent_today) {
            bins[binning.bin_of_seconds(e.lifespan_seconds())] += e.value;
            total += e.value;
        }
        out.push_back(detail::to_distribution(snap.date, DailyAgeDistribution::Kind::StxoLifespan,
                                              bins, total));
    }
    return out;
}

namespace detail {

/// Exact rational value-seconds accumulator. Numerator and denominator are
/// reduced before conversion so the quotient is invariant under uniform
/// integer scaling of the weights.
struct ValueSecondsSum {
    __int128 value_seconds = 0;
    __int128 value = 0;

    void add(Amount v, std::int64_t seconds) {
        value_seconds += static_cast<__int128>(v) * seconds;
        value += v;
    }

    double mean_seconds() const {
        __int128 num = value_seconds;
        __int128 den = value;
        __int128 g = std::gcd(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    }
};

} // namespace detail

/// Weighted average lifespan of each day's spends, in years of 365 days.
/// Days without spends carry an absent value.
inline MetricSeries wal_series(const LedgerTimeline& timeline) {
    MetricSeries series;
    series.name = "wal";
    series.start = timeline.range.first;
    series.values.reserve(timeline.days.size());
    for (const auto& snap : timeline.days) {
        if (snap.spent_today.empty()) {
            series.values.push_back(std::nullopt);
            continue;
        }
        detail::ValueSecondsSum sum;
        for (const auto& e : snap.spent_today) sum.add(e.value, e.lifespan_seconds());
        series.values.push_back(sum.mean_seconds() / static_cast<double>(kSecondsPerYear));
    }
    return series;
}

/// Coin-days destroyed by each day's spends; zero on days without spends.
inline MetricSeries cdd_series(const LedgerTimeline& timeline) {
    MetricSeries series;
    series.name = "cdd";
    series.start = timeline.range.first;
    series.values.reserve(timeline.days.size());
    for (const auto& snap : timeline.days) {
        __int128 value_seconds = 0;
        for (const auto& e : snap.spent_today)
            value_seconds += static_cast<__int128>(e.value) * e.lifespan_seconds();
        series.values.push_back(static_cast<double>(value_seconds) /
                                (static_cast<double>(kCoin) * static_cast<double>(kSecondsPerDay)));
    }
    return series;
}

/// Value share of the live UTXO set older than one year; absent while the
/// set is empty.
inline MetricSeries staking_series(const LedgerTimeline& timeline, const AgeBinning& binning = {}) {
    MetricSeries series;
    series.name = "staking_ratio";
    series.start = timeline.range.first;
    series.values.reserve(timeline.days.size());
    for (const auto& day : utxo_cohorts(timeline, binning)) {
        if (day.total_value > 0)
            series.values.push_back(static_cast<double>(day.staked_value) /
                                    static_cast<double>(day.total_value));
        else
            series.values.push_back(std::nullopt);
    }
    return series;
}

inline std::optional<double> staking_ratio(const LedgerTimeline& timeline, const AgeBinning& binning,
                                           Day date) {
    return staking_series(timeline, binning).at(date);
}

inline std::string distribution_csv(const std::vector<DailyAgeDistribution>& dists) {
    std::ostringstream out;
    out << "date";
    for (auto label : AgeBinning::labels()) out << ',' << label;
    out << "\n";
    for (const auto& d : dists) {
        out << format_day(d.date);
        for (double share : d.shares) out << ',' << csv::format_double(share);
        out << "\n";
    }
    return out.str();
}

inline void write_distribution(const std::string& path, const std::vector<DailyAgeDistribution>& dists) {
    csv::write_file(path, distribution_csv(dists));
}

} // namespace coinlens
