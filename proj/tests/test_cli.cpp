#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "coinlens/coinlens.hpp"
#include "test_util.hpp"

using namespace coinlens;
using nlohmann::json;

namespace {

struct CliRun {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CliRun cli(const testutil::TempDir& dir, const std::string& args) {
    static int n = 0;
    std::string out_file = dir.file("stdout." + std::to_string(n));
    std::string err_file = dir.file("stderr." + std::to_string(n));
    ++n;
    std::string cmd =
        std::string(COINLENS_CLI_PATH) + " " + args + " >" + out_file + " 2>" + err_file;
    int status = std::system(cmd.c_str());
    CliRun r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = testutil::read_text(out_file);
    r.err = testutil::read_text(err_file);
    return r;
}

json load_json(const std::string& path) { return json::parse(testutil::read_text(path)); }

// 500 days of issuance with periodic spends plus a matching price file,
// enough history for every estimator to come alive.
void write_valuation_inputs(const testutil::TempDir& dir) {
    std::vector<OutputRecord> records;
    for (int d = 0; d < 500; ++d)
        records.push_back(testutil::record("cb" + std::to_string(d), 0, 50 * kCoin,
                                           day_start(Day{d})));
    for (int d = 370; d < 500; d += 5)
        records[static_cast<std::size_t>(d - 368)].spent_at = day_start(Day{d}) + 300;
    std::sort(records.begin(), records.end(), canonical_less);
    write_output_records(dir.file("records.csv"), records);

    MarketSeries market;
    for (int d = 300; d < 500; ++d) market.append(Day{d}, 100.0 + d % 7);
    write_price_series(dir.file("prices.csv"), market);
}

} // namespace

TEST_CASE("synth writes a deterministic chain and a manifest") {
    testutil::TempDir dir;
    auto a = cli(dir, "synth --seed 5 --days 60 --out-dir " + dir.file("a"));
    INFO(a.err);
    REQUIRE(a.exit_code == 0);
    auto b = cli(dir, "synth --seed 5 --days 60 --out-dir " + dir.file("b"));
    REQUIRE(b.exit_code == 0);

    auto chain_a = testutil::read_text(dir.file("a/chain.csv"));
    REQUIRE(chain_a == testutil::read_text(dir.file("b/chain.csv")));

    auto txs = load_transactions(dir.file("a/chain.csv"));
    REQUIRE(txs.size() >= 60);
    REQUIRE(txs[0].tx_id == "cb-000000");

    auto ma = load_json(dir.file("a/manifest.json"));
    auto mb = load_json(dir.file("b/manifest.json"));
    REQUIRE(ma["command"] == "synth");
    REQUIRE(ma["run_digest"] == mb["run_digest"]); // timestamps differ, digests must not
    REQUIRE(ma["outputs"].size() == 1);
    REQUIRE(ma["config"]["seed"] == 5);

    auto c = cli(dir, "synth --seed 5 --days 60 --holding bimodal:7,365,0.3 --out-dir " +
                          dir.file("c"));
    REQUIRE(c.exit_code == 0);
    REQUIRE(testutil::read_text(dir.file("c/chain.csv")) != chain_a);
}

TEST_CASE("ingest normalizes raw chains and is idempotent on its own output") {
    testutil::TempDir dir;
    REQUIRE(cli(dir, "synth --seed 11 --days 80 --out-dir " + dir.file("s")).exit_code == 0);

    auto r1 = cli(dir, "ingest --input " + dir.file("s/chain.csv") + " --out-dir " + dir.file("i1"));
    INFO(r1.err);
    REQUIRE(r1.exit_code == 0);

    auto expected = output_records_csv(match_spends(load_transactions(dir.file("s/chain.csv"))));
    REQUIRE(testutil::read_text(dir.file("i1/records.csv")) == expected);

    auto report = load_json(dir.file("i1/ingest_report.json"));
    REQUIRE(report["mode"] == "raw");
    REQUIRE(report["records"].get<std::size_t>() ==
            match_spends(load_transactions(dir.file("s/chain.csv"))).size());
    REQUIRE(report["records"].get<int>() ==
            report["spent"].get<int>() + report["unspent"].get<int>());
    REQUIRE(report["first_day"] == "1970-01-01");
    REQUIRE(report.contains("last_day"));

    auto r2 =
        cli(dir, "ingest --input " + dir.file("i1/records.csv") + " --out-dir " + dir.file("i2"));
    REQUIRE(r2.exit_code == 0);
    REQUIRE(testutil::read_text(dir.file("i2/records.csv")) ==
            testutil::read_text(dir.file("i1/records.csv")));
    REQUIRE(load_json(dir.file("i2/ingest_report.json"))["mode"] == "prejoined");
}

TEST_CASE("cli rejects unusable input with exit code 2") {
    testutil::TempDir dir;

    auto missing = cli(dir, "ingest --input " + dir.file("nope.csv"));
    REQUIRE(missing.exit_code == 2);
    REQUIRE(missing.err.find("error:") != std::string::npos);

    testutil::write_text(dir.file("junk.csv"), "a,b,c\n1,2,3\n");
    auto junk = cli(dir, "ingest --input " + dir.file("junk.csv"));
    REQUIRE(junk.exit_code == 2);
    REQUIRE(junk.err.find("neither input schema") != std::string::npos);

    REQUIRE(cli(dir, "ingest").exit_code == 2);          // --input is required
    REQUIRE(cli(dir, "frobnicate").exit_code == 2);      // unknown subcommand
    REQUIRE(cli(dir, "").exit_code == 2);                // a subcommand is required
    REQUIRE(cli(dir, "synth --bogus-flag 1").exit_code == 2);
    REQUIRE(cli(dir, "metrics --input x --format yaml").exit_code == 2);
}

TEST_CASE("metrics emits every series with the expected schemas") {
    testutil::TempDir dir;
    REQUIRE(cli(dir, "synth --seed 21 --days 90 --spender-fraction 0.7 --out-dir " +
                         dir.file("s"))
                .exit_code == 0);
    auto run = cli(dir, "metrics --input " + dir.file("s/chain.csv") + " --out-dir " + dir.file("m"));
    INFO(run.err);
    REQUIRE(run.exit_code == 0);

    for (const char* name : {"supply", "velocity", "staking", "wal", "cdd", "dilution"}) {
        auto text = testutil::read_text(dir.file(std::string("m/") + name + ".csv"));
        REQUIRE(text.rfind("date,value\n", 0) == 0);
    }
    auto supply = csv::load_metric_csv(dir.file("m/supply.csv"), "value");
    REQUIRE(supply.size() == 90);
    REQUIRE(supply.start == Day{0});
    REQUIRE(*supply.values.front() == 50.0);
    REQUIRE(*supply.values.back() == 90 * 50.0);

    auto utxo = testutil::read_text(dir.file("m/utxo_age.csv"));
    REQUIRE(utxo.rfind("date,bin_lt1d,bin_1d_1mo,bin_1mo_1y,bin_1y_2y,bin_2y_5y,bin_5y_10y,"
                       "bin_gt10y\n",
                       0) == 0);
    REQUIRE(testutil::read_text(dir.file("m/stxo_lifespan.csv")).rfind("date,bin_lt1d", 0) == 0);

    auto manifest = load_json(dir.file("m/manifest.json"));
    REQUIRE(manifest["command"] == "metrics");
    REQUIRE(manifest["outputs"].size() == 8);
}

TEST_CASE("metrics honours the emission window without losing history") {
    testutil::TempDir dir;
    write_valuation_inputs(dir);

    auto run = cli(dir, "metrics --input " + dir.file("records.csv") + " --from 1971-01-10 --to " +
                            "1971-01-19 --out-dir " + dir.file("m"));
    INFO(run.err);
    REQUIRE(run.exit_code == 0);
    auto supply = csv::load_metric_csv(dir.file("m/supply.csv"), "value");
    REQUIRE(supply.size() == 10);
    REQUIRE(format_day(supply.start) == "1971-01-10");
    // Day 374 counted from genesis: issuance kept accumulating before the window.
    REQUIRE(*supply.values.front() == 375 * 50.0);

    auto empty = cli(dir, "metrics --input " + dir.file("records.csv") +
                             " --from 1990-01-01 --out-dir " + dir.file("e"));
    REQUIRE(empty.exit_code == 0);
    REQUIRE(testutil::read_text(dir.file("e/supply.csv")) == "date,value\n");

    auto backwards = cli(dir, "metrics --input " + dir.file("records.csv") +
                                  " --from 1971-02-01 --to 1971-01-01 --out-dir " + dir.file("x"));
    REQUIRE(backwards.exit_code == 2);
    REQUIRE(backwards.err.find("--from is after --to") != std::string::npos);
}

TEST_CASE("metrics reproduces the worked lifespan example end to end") {
    testutil::TempDir dir;
    constexpr std::int64_t kYear = 365LL * 86400;
    Day death{4000};
    Timestamp at = day_start(death) + 600;
    std::vector<OutputRecord> records{
        testutil::record("a", 0, 1 * kCoin, at - 9 * kYear, at),
        testutil::record("b", 0, 2 * kCoin, at - 6 * kYear, at),
    };
    std::sort(records.begin(), records.end(), canonical_less);
    write_output_records(dir.file("records.csv"), records);

    auto run = cli(dir, "metrics --input " + dir.file("records.csv") + " --out-dir " + dir.file("m"));
    REQUIRE(run.exit_code == 0);
    auto wal = testutil::read_text(dir.file("m/wal.csv"));
    REQUIRE(wal.find(format_day(death) + ",7\n") != std::string::npos);
}

TEST_CASE("valuation demands overlapping spans and writes a loadable pu series") {
    testutil::TempDir dir;
    write_valuation_inputs(dir);

    SECTION("disjoint spans fail") {
        MarketSeries far;
        far.append(Day{4000}, 10.0);
        far.append(Day{4001}, 11.0);
        write_price_series(dir.file("far.csv"), far);
        auto run = cli(dir, "valuation --input " + dir.file("records.csv") + " --prices " +
                                dir.file("far.csv") + " --out-dir " + dir.file("v"));
        REQUIRE(run.exit_code == 2);
        REQUIRE(run.err.find("do not overlap") != std::string::npos);
    }
    SECTION("the emitted rows match the library pipeline bit for bit") {
        auto run = cli(dir, "valuation --input " + dir.file("records.csv") + " --prices " +
                                dir.file("prices.csv") + " --out-dir " + dir.file("v"));
        INFO(run.err);
        REQUIRE(run.exit_code == 0);

        auto records = load_output_records(dir.file("records.csv"));
        auto market = load_price_series(dir.file("prices.csv"));
        auto timeline = daily_snapshots(records, DayRange{Day{0}, Day{499}});
        auto rows = compute_valuation(timeline, market);
        REQUIRE(testutil::read_text(dir.file("v/pu.csv")) == pu_csv(rows));

        auto loaded = load_pu_series(dir.file("v/pu.csv"));
        REQUIRE_FALSE(loaded.empty());
        REQUIRE(loaded.front().date >= Day{365});
    }
    SECTION("window clipping applies to the emitted rows") {
        auto run = cli(dir, "valuation --input " + dir.file("records.csv") + " --prices " +
                                dir.file("prices.csv") + " --from 1971-02-01 --out-dir " +
                                dir.file("vc"));
        REQUIRE(run.exit_code == 0);
        auto loaded = load_pu_series(dir.file("vc/pu.csv"));
        for (const auto& r : loaded) REQUIRE(format_day(r.date) >= std::string("1971-02-01"));
    }
}

TEST_CASE("backtest trades the pu series and the baselines") {
    testutil::TempDir dir;
    write_valuation_inputs(dir);
    REQUIRE(cli(dir, "valuation --input " + dir.file("records.csv") + " --prices " +
                         dir.file("prices.csv") + " --out-dir " + dir.file("v"))
                .exit_code == 0);

    SECTION("pu-quantile strategy matches the library run") {
        auto run = cli(dir, "backtest --input " + dir.file("v/pu.csv") + " --prices " +
                                dir.file("prices.csv") + " --warmup 5 --out-dir " + dir.file("b"));
        INFO(run.err);
        REQUIRE(run.exit_code == 0);

        BacktestConfig cfg;
        cfg.warmup_days = 5;
        auto rows = load_pu_series(dir.file("v/pu.csv"));
        auto result =
            run_backtest(generate_signals(pu_points(rows), cfg),
                         load_price_series(dir.file("prices.csv")), cfg);

        auto summary = load_json(dir.file("b/summary.json"));
        REQUIRE(summary["strategy"] == "pu-quantile");
        REQUIRE(summary["roi_percent"].get<double>() == result.roi_percent);
        REQUIRE(summary["trade_count"].get<std::size_t>() == result.trades.size());
        REQUIRE(summary["config"]["warmup_days"] == 5);
        REQUIRE(summary["config"]["fee_rate"] == 0.001);

        auto trades_text = testutil::read_text(dir.file("b/trades.csv"));
        REQUIRE(trades_text == trades_csv(result.trades));
        REQUIRE(testutil::read_text(dir.file("b/equity.csv"))
                    .rfind("date,equity_usd\n", 0) == 0);
    }
    SECTION("buy-and-hold baseline") {
        auto run = cli(dir, "backtest --baseline buy-and-hold --prices " + dir.file("prices.csv") +
                                " --out-dir " + dir.file("bh"));
        REQUIRE(run.exit_code == 0);
        auto summary = load_json(dir.file("bh/summary.json"));
        REQUIRE(summary["strategy"] == "buy-and-hold");
        REQUIRE(summary["trade_count"] == 1);
    }
    SECTION("ma-crossover baseline records its windows") {
        auto run = cli(dir, "backtest --baseline ma-crossover --ma-short 5 --ma-long 15 --prices " +
                                dir.file("prices.csv") + " --out-dir " + dir.file("mac"));
        REQUIRE(run.exit_code == 0);
        auto summary = load_json(dir.file("mac/summary.json"));
        REQUIRE(summary["strategy"] == "ma-crossover");
        REQUIRE(summary["config"]["ma_short"] == 5);
        REQUIRE(summary["config"]["ma_long"] == 15);
    }
    SECTION("bad configurations exit with 2") {
        REQUIRE(cli(dir, "backtest --baseline nonsense --prices " + dir.file("prices.csv"))
                    .exit_code == 2);
        REQUIRE(cli(dir, "backtest --input " + dir.file("v/pu.csv") + " --prices " +
                            dir.file("prices.csv") + " --buy-q 0.9 --sell-q 0.1")
                    .exit_code == 2);
        auto no_input = cli(dir, "backtest --prices " + dir.file("prices.csv"));
        REQUIRE(no_input.exit_code == 2);
        REQUIRE(no_input.err.find("--input") != std::string::npos);
        REQUIRE(cli(dir, "backtest --input " + dir.file("v/pu.csv")).exit_code == 2);
    }
}

TEST_CASE("the out-dir environment default is honoured") {
    testutil::TempDir dir;
    std::string cwd = dir.file("cwd");
    std::filesystem::create_directories(cwd);
    // cli() runs through the shell, so control the variable in the command.
    std::string plain = "cd " + cwd + " && env -u COINLENS_OUT " +
                        std::string(COINLENS_CLI_PATH) + " synth --seed 2 --days 5 >/dev/null 2>&1";
    REQUIRE(std::system(plain.c_str()) == 0);

    std::string env_dir = dir.file("env_out");
    std::string routed = "COINLENS_OUT=" + env_dir + " " + std::string(COINLENS_CLI_PATH) +
                         " synth --seed 2 --days 5 >/dev/null 2>&1";
    REQUIRE(std::system(routed.c_str()) == 0);
    REQUIRE(testutil::read_text(env_dir + "/chain.csv") ==
            testutil::read_text(cwd + "/chain.csv"));
}
