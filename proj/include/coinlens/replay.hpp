#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "coinlens/types.hpp"

namespace coinlens {

/// One output consumed on a given day. Indexes into the timeline's record
/// sequence; lifespan and death day are derived, so the lifespan invariant
/// holds by construction.
struct SpendEvent {
    std::size_t record_index = 0;
    Amount value = 0;
    Timestamp created_at = 0;
    Timestamp spent_at = 0;

    std::int64_t lifespan_seconds() const { return spent_at - created_at; }
    Day death_day() const { return day_of(spent_at); }
};

struct DailySnapshot {
    Day date;
    Amount utxo_total_value = 0;
    std::int64_t utxo_count = 0;
    Amount cumulative_issuance = 0;
    Amount created_today_value = 0;
    /// Half-open range into the timeline's record sequence: outputs born today.
    std::size_t created_begin = 0;
    std::size_t created_end = 0;
    std::vector<SpendEvent> spent_today;

    Amount spent_today_value() const {
        Amount total = 0;
        for (const auto& e : spent_today) total += e.value;
        return total;
    }
};

/// Replay output: the canonical record sequence plus one snapshot per day of
/// the requested range. Immutable after construction; safe to share across
/// threads.
struct LedgerTimeline {
    std::vector<OutputRecord> records;
    std::vector<DailySnapshot> days;
    DayRange range{Day{0}, Day{0}};

    const DailySnapshot* snapshot(Day d) const {
        if (!range.contains(d) || days.empty()) return nullptr;
        return &days[static_cast<std::size_t>(d - range.first)];
    }
};

/// Resolves every input of `transactions` against the outputs created before
/// it, producing one OutputRecord per transaction output with spent_at filled
/// for consumed outputs. Aborts on dangling inputs and double-spends.
inline std::vector<OutputRecord> match_spends(std::span<const TransactionRecord> transactions) {
    std::vector<OutputRecord> records;
    std::unordered_map<std::string, std::size_t> by_key;
    for (const auto& tx : transactions) {
        for (const auto& in : tx.inputs) {
            std::string key = in.tx_id + ":" + std::to_string(in.output_index);
            auto it = by_key.find(key);
            if (it == by_key.end())
                throw InputError("dangling input: transaction " + tx.tx_id + " spends unknown output (" +
                                 in.tx_id + ", " + std::to_string(in.output_index) + ")");
            OutputRecord& src = records[it->second];
            if (src.spent_at)
                throw InputError("double-spend: transaction " + tx.tx_id + " re-spends output (" +
                                 in.tx_id + ", " + std::to_string(in.output_index) + ")");
            if (tx.timestamp < src.created_at)
                throw InputError("transaction " + tx.tx_id + " spends output created later");
            src.spent_at = tx.timestamp;
        }
        for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
            OutputRecord r;
            r.tx_id = tx.tx_id;
            r.output_index = static_cast<std::uint32_t>(i);
            r.value = tx.outputs[i];
            r.created_at = tx.timestamp;
            r.is_coinbase = tx.is_coinbase;
            std::string key = r.tx_id + ":" + std::to_string(r.output_index);
            if (!by_key.emplace(std::move(key), records.size()).second)
                throw InputError("duplicate output (" + r.tx_id + ", " + std::to_string(i) + ")");
            records.push_back(std::move(r));
        }
    }
    std::sort(records.begin(), records.end(), canonical_less);
    return records;
}

/// Replays `records` (canonically sorted) over the inclusive day range.
/// State accumulates from the beginning of the record history even when the
/// range starts later, so the first snapshot carries the pre-range UTXO set.
inline LedgerTimeline daily_snapshots(std::vector<OutputRecord> records, DayRange range) {
    if (!range.valid()) throw InputError("day range is empty");
    for (std::size_t i = 1; i < records.size(); ++i)
        if (canonical_less(records[i], records[i - 1]))
            throw InputError("records must be sorted by created_at");

    // Spend events ordered by death time.
    std::vector<SpendEvent> spends;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.value <= 0) throw InputError("output (" + r.tx_id + ", " +
                                           std::to_string(r.output_index) + ") has non-positive value");
        if (r.spent_at) {
            if (*r.spent_at < r.created_at)
                throw InputError("output (" + r.tx_id + ", " + std::to_string(r.output_index) +
                                 ") spent before creation");
            spends.push_back(SpendEvent{i, r.value, r.created_at, *r.spent_at});
        }
    }
    std::sort(spends.begin(), spends.end(), [](const SpendEvent& a, const SpendEvent& b) {
        return std::tie(a.spent_at, a.record_index) < std::tie(b.spent_at, b.record_index);
    });

    LedgerTimeline timeline;
    timeline.range = range;
    timeline.days.reserve(static_cast<std::size_t>(range.length()));

    Amount utxo_total = 0;
    std::int64_t utxo_count = 0;
    Amount issuance = 0;
    std::size_t next_created = 0;
    std::size_t next_spent = 0;

    // Roll state forward silently for days before the range.
    auto advance_births = [&](Day upto) {
        Amount created_value = 0;
        std::size_t begin = next_created;
        while (next_created < records.size() && day_of(records[next_created].created_at) <= upto) {
            const auto& r = records[next_created];
            created_value += r.value;
            utxo_total += r.value;
            ++utxo_count;
            if (r.is_coinbase) issuance += r.value;
            ++next_created;
        }
        return std::pair<Amount, std::pair<std::size_t, std::size_t>>{created_value,
                                                                      {begin, next_created}};
    };
    auto advance_deaths = [&](Day upto, std::vector<SpendEvent>* sink) {
        while (next_spent < spends.size() && spends[next_spent].death_day() <= upto) {
            const auto& e = spends[next_spent];
            utxo_total -= e.value;
            --utxo_count;
            if (sink) sink->push_back(e);
            ++next_spent;
        }
    };

    if (range.first.index > std::numeric_limits<std::int32_t>::min()) {
        Day before = range.first - 1;
        advance_births(before);
        advance_deaths(before, nullptr);
    }

    for (Day d = range.first; d <= range.last; ++d) {
        DailySnapshot snap;
        snap.date = d;
        auto [created_value, created_range] = advance_births(d);
        snap.created_today_value = created_value;
        snap.created_begin = created_range.first;
        snap.created_end = created_range.second;
        advance_deaths(d, &snap.spent_today);
        snap.utxo_total_value = utxo_total;
        snap.utxo_count = utxo_count;
        snap.cumulative_issuance = issuance;
        timeline.days.push_back(std::move(snap));
    }
    timeline.records = std::move(records);
    return timeline;
}

/// Cumulative issued supply at the end of each day, in coins.
inline MetricSeries supply_series(const LedgerTimeline& timeline) {
    MetricSeries series;
    series.name = "supply";
    series.start = timeline.range.first;
    series.values.reserve(timeline.days.size());
    for (const auto& snap : timeline.days)
        series.values.push_back(to_coins(snap.cumulative_issuance));
    return series;
}

} // namespace coinlens
