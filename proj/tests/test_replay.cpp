#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "coinlens/replay.hpp"
#include "test_util.hpp"

using namespace coinlens;
using testutil::record;

namespace {

TransactionRecord tx(std::string id, Timestamp at, bool coinbase, std::vector<TxInput> inputs,
                     std::vector<Amount> outputs) {
    TransactionRecord t;
    t.tx_id = std::move(id);
    t.timestamp = at;
    t.is_coinbase = coinbase;
    t.inputs = std::move(inputs);
    t.outputs = std::move(outputs);
    return t;
}

} // namespace

TEST_CASE("match_spends resolves the two-transaction fixture") {
    std::vector<TransactionRecord> txs{
        tx("mint", 0, true, {}, {7 * kCoin}),
        tx("pay", 15811200, false, {{"mint", 0}}, {7 * kCoin}),
    };
    auto records = match_spends(txs);
    REQUIRE(records.size() == 2);
    REQUIRE(records[0].tx_id == "mint");
    REQUIRE(records[0].value == 700000000);
    REQUIRE(records[0].spent_at == 15811200);
    REQUIRE(records[0].is_coinbase);
    REQUIRE(records[1].tx_id == "pay");
    REQUIRE_FALSE(records[1].spent_at.has_value());
}

TEST_CASE("match_spends rejects broken references") {
    SECTION("dangling input names the spender") {
        std::vector<TransactionRecord> txs{
            tx("pay", 100, false, {{"ghost", 0}}, {kCoin}),
        };
        REQUIRE_THROWS_WITH(match_spends(txs), Catch::Matchers::ContainsSubstring("pay"));
    }
    SECTION("double spend") {
        std::vector<TransactionRecord> txs{
            tx("mint", 0, true, {}, {2 * kCoin}),
            tx("p1", 100, false, {{"mint", 0}}, {2 * kCoin}),
            tx("p2", 200, false, {{"mint", 0}}, {2 * kCoin}),
        };
        REQUIRE_THROWS_WITH(match_spends(txs), Catch::Matchers::ContainsSubstring("p2"));
    }
    SECTION("spend before creation") {
        std::vector<TransactionRecord> txs{
            tx("pay", 50, false, {{"mint", 0}}, {kCoin}),
            tx("mint", 100, true, {}, {kCoin}),
        };
        REQUIRE_THROWS_AS(match_spends(txs), InputError);
    }
}

TEST_CASE("half-year spend lands on its death day with exact lifespan") {
    // Created 2020-07-02T12:00:00Z, spent 2021-01-01T12:00:00Z.
    std::vector<OutputRecord> records{
        record("a", 0, 7 * kCoin, 1593691200, 1609502400),
    };
    DayRange range{Day{18445}, Day{18630}};
    auto timeline = daily_snapshots(records, range);

    const DailySnapshot* death = timeline.snapshot(Day{18628});
    REQUIRE(death != nullptr);
    REQUIRE(death->spent_today.size() == 1);
    const SpendEvent& ev = death->spent_today[0];
    REQUIRE(ev.lifespan_seconds() == 15811200);
    REQUIRE(ev.death_day() == Day{18628});
    // 183 full days, within a day of half a 365-day year.
    REQUIRE(ev.lifespan_seconds() == 183 * kSecondsPerDay);

    for (const auto& snap : timeline.days) {
        if (snap.date != Day{18628}) REQUIRE(snap.spent_today.empty());
        REQUIRE(snap.utxo_total_value == (snap.date < Day{18628} ? 7 * kCoin : 0));
    }
}

TEST_CASE("empty ledger produces all-zero snapshots") {
    auto timeline = daily_snapshots({}, DayRange{Day{0}, Day{9}});
    REQUIRE(timeline.days.size() == 10);
    for (const auto& snap : timeline.days) {
        REQUIRE(snap.utxo_total_value == 0);
        REQUIRE(snap.utxo_count == 0);
        REQUIRE(snap.cumulative_issuance == 0);
        REQUIRE(snap.spent_today.empty());
    }
}

TEST_CASE("supply series tracks cumulative coinbase issuance") {
    SECTION("single issuance stays constant") {
        std::vector<OutputRecord> records{record("cb", 0, 50 * kCoin, day_start(Day{1}))};
        auto timeline = daily_snapshots(records, DayRange{Day{1}, Day{5}});
        auto supply = supply_series(timeline);
        for (std::size_t i = 0; i < supply.size(); ++i) REQUIRE(supply.values[i] == 50.0);
    }
    SECTION("daily 50-coin coinbase climbs arithmetically") {
        std::vector<OutputRecord> records;
        for (int d = 0; d < 10; ++d)
            records.push_back(record("cb" + std::to_string(d), 0, 50 * kCoin, day_start(Day{d})));
        auto timeline = daily_snapshots(records, DayRange{Day{0}, Day{9}});
        auto supply = supply_series(timeline);
        for (int d = 0; d < 10; ++d) REQUIRE(supply.values[d] == 50.0 * (d + 1));
    }
    SECTION("non-coinbase outputs do not count as issuance") {
        std::vector<OutputRecord> records{
            record("cb", 0, 50 * kCoin, 0, 86400 + 600),
            record("pay", 0, 50 * kCoin, 86400 + 600, std::nullopt, false),
        };
        auto timeline = daily_snapshots(records, DayRange{Day{0}, Day{3}});
        REQUIRE(timeline.days.back().cumulative_issuance == 50 * kCoin);
        REQUIRE(timeline.days.back().utxo_total_value == 50 * kCoin);
    }
}

TEST_CASE("snapshot day-over-day identity and conservation") {
    // Three lineages with spends scattered over a month.
    std::vector<OutputRecord> records{
        record("a", 0, 10 * kCoin, day_start(Day{0}), day_start(Day{3}) + 60),
        record("a1", 0, 10 * kCoin, day_start(Day{3}) + 60, day_start(Day{20}), false),
        record("a2", 0, 10 * kCoin, day_start(Day{20}), std::nullopt, false),
        record("b", 0, 25 * kCoin, day_start(Day{1}) + 43200, day_start(Day{1}) + 43260),
        record("b1", 0, 25 * kCoin, day_start(Day{1}) + 43260, std::nullopt, false),
        record("c", 0, 5 * kCoin, day_start(Day{4}), std::nullopt),
    };
    std::sort(records.begin(), records.end(), canonical_less);
    auto timeline = daily_snapshots(records, DayRange{Day{0}, Day{30}});

    Amount prev = 0;
    Amount created_running = 0, spent_running = 0;
    std::size_t spend_events = 0;
    for (const auto& snap : timeline.days) {
        REQUIRE(snap.utxo_total_value ==
                prev + snap.created_today_value - snap.spent_today_value());
        prev = snap.utxo_total_value;
        created_running += snap.created_today_value;
        spent_running += snap.spent_today_value();
        REQUIRE(snap.utxo_total_value == created_running - spent_running);
        spend_events += snap.spent_today.size();
    }
    REQUIRE(spend_events == 3); // each spent output dies exactly once
}

TEST_CASE("activity before the range is rolled into the first snapshot") {
    std::vector<OutputRecord> records{
        record("old", 0, 40 * kCoin, day_start(Day{0}), day_start(Day{2})),
        record("keep", 0, 8 * kCoin, day_start(Day{1}), std::nullopt),
        record("mid", 0, 40 * kCoin, day_start(Day{2}), std::nullopt, false),
    };
    std::sort(records.begin(), records.end(), canonical_less);

    auto full = daily_snapshots(records, DayRange{Day{0}, Day{10}});
    auto clipped = daily_snapshots(records, DayRange{Day{5}, Day{10}});
    for (const auto& snap : clipped.days) {
        const DailySnapshot* ref = full.snapshot(snap.date);
        REQUIRE(snap.utxo_total_value == ref->utxo_total_value);
        REQUIRE(snap.utxo_count == ref->utxo_count);
        REQUIRE(snap.cumulative_issuance == ref->cumulative_issuance);
    }
    REQUIRE(clipped.days.front().utxo_total_value == 48 * kCoin);
}

TEST_CASE("replay requires sorted records and a non-empty range") {
    std::vector<OutputRecord> records{
        record("late", 0, kCoin, 86400),
        record("early", 0, kCoin, 0),
    };
    REQUIRE_THROWS_AS(daily_snapshots(records, DayRange{Day{0}, Day{1}}), InputError);
    REQUIRE_THROWS_AS(daily_snapshots({}, DayRange{Day{5}, Day{4}}), InputError);
}

TEST_CASE("match_spends output feeds replay with exact conservation") {
    std::vector<TransactionRecord> txs{
        tx("m1", day_start(Day{0}), true, {}, {30 * kCoin}),
        tx("m2", day_start(Day{1}), true, {}, {20 * kCoin}),
        tx("join", day_start(Day{2}) + 600, false, {{"m1", 0}, {"m2", 0}},
           {45 * kCoin, 5 * kCoin}),
        tx("split", day_start(Day{4}) + 600, false, {{"join", 1}}, {5 * kCoin}),
    };
    auto records = match_spends(txs);
    REQUIRE(std::is_sorted(records.begin(), records.end(), canonical_less));
    auto timeline = daily_snapshots(records, DayRange{Day{0}, Day{6}});
    // Fee-free chain: live value equals issuance on every day.
    for (const auto& snap : timeline.days)
        REQUIRE(snap.utxo_total_value == snap.cumulative_issuance);
    REQUIRE(timeline.days.back().utxo_total_value == 50 * kCoin);
}
