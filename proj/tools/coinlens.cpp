// Command-line front end: synth | ingest | metrics | valuation | backtest.
// Each command writes its artifacts plus a manifest.json into --out-dir
// (default: $COINLENS_OUT, then the working directory).
// Exit codes: 0 success, 2 usage or input error, 3 internal failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "coinlens/coinlens.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace coinlens;

std::string default_out_dir() {
    const char* env = std::getenv("COINLENS_OUT");
    return env && *env ? env : ".";
}

std::string out_path(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

Day parse_day_flag(const std::string& value, const char* flag) {
    auto d = parse_day(value);
    if (!d) throw InputError(std::string(flag) + ": expected YYYY-MM-DD, got '" + value + "'");
    return *d;
}

std::optional<DayRange> clip_flags(const std::optional<std::string>& from,
                                   const std::optional<std::string>& to) {
    if (!from && !to) return std::nullopt;
    DayRange r{Day{std::numeric_limits<std::int32_t>::min()},
               Day{std::numeric_limits<std::int32_t>::max()}};
    if (from) r.first = parse_day_flag(*from, "--from");
    if (to) r.last = parse_day_flag(*to, "--to");
    if (!r.valid()) throw InputError("--from is after --to");
    return r;
}

std::string sniff_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

struct LoadedRecords {
    std::vector<OutputRecord> records;
    std::string mode;             // "prejoined" or "raw"
    std::size_t transactions = 0; // raw mode only
};

LoadedRecords load_records_any(const std::string& path, std::string mode) {
    if (mode == "auto") {
        auto header = sniff_header(path);
        if (header == kOutputRecordHeader)
            mode = "prejoined";
        else if (header == kTransactionHeader)
            mode = "raw";
        else
            throw InputError(path + ": header matches neither input schema");
    }
    LoadedRecords out;
    out.mode = mode;
    if (mode == "prejoined") {
        out.records = load_output_records(path);
    } else {
        auto txs = load_transactions(path);
        out.transactions = txs.size();
        out.records = match_spends(txs);
    }
    return out;
}

// Day span covered by the record set: first creation through last event.
std::optional<DayRange> data_span(const std::vector<OutputRecord>& records) {
    if (records.empty()) return std::nullopt;
    DayRange span{day_of(records.front().created_at), day_of(records.front().created_at)};
    for (const auto& r : records) {
        Day last = r.spent_at ? std::max(day_of(*r.spent_at), day_of(r.created_at))
                              : day_of(r.created_at);
        span.first = std::min(span.first, day_of(r.created_at));
        span.last = std::max(span.last, last);
    }
    return span;
}

MetricSeries slice_series(const MetricSeries& series, std::optional<DayRange> keep) {
    if (!keep) return series;
    MetricSeries out;
    out.name = series.name;
    if (series.empty()) return out;
    Day lo = std::max(series.start, keep->first);
    Day hi = std::min(series.date(series.size() - 1), keep->last);
    if (lo > hi) return out;
    out.start = lo;
    for (Day d = lo; d <= hi; ++d)
        out.values.push_back(series.at(d));
    return out;
}

std::vector<DailyAgeDistribution> slice_distributions(std::vector<DailyAgeDistribution> dists,
                                                      std::optional<DayRange> keep) {
    if (!keep) return dists;
    std::erase_if(dists, [&](const auto& d) { return !keep->contains(d.date); });
    return dists;
}

HoldingTimeDistribution parse_holding(const std::string& spec) {
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto nums = csv::split(args);
    auto need = [&](std::size_t i) {
        auto v = i < nums.size() ? csv::parse_double(nums[i]) : std::nullopt;
        if (!v) throw InputError("--holding: bad arguments in '" + spec + "'");
        return *v;
    };
    if (kind == "exponential") return HoldingTimeDistribution::exponential(need(0));
    if (kind == "fixed") return HoldingTimeDistribution::fixed(need(0));
    if (kind == "bimodal") return HoldingTimeDistribution::bimodal(need(0), need(1), need(2));
    throw InputError("--holding: unknown distribution '" + kind +
                     "' (use exponential:MEAN, fixed:DAYS, or bimodal:SHORT,LONG,MIX)");
}

json holding_json(const HoldingTimeDistribution& h) {
    switch (h.kind) {
        case HoldingTimeDistribution::Kind::Fixed:
            return {{"kind", "fixed"}, {"days", h.a_days}};
        case HoldingTimeDistribution::Kind::Bimodal:
            return {{"kind", "bimodal"},
                    {"short_mean_days", h.a_days},
                    {"long_mean_days", h.b_days},
                    {"long_weight", h.long_weight}};
        default:
            return {{"kind", "exponential"}, {"mean_days", h.a_days}};
    }
}

void write_json(const std::string& path, const json& j) { csv::write_file(path, j.dump(2) + "\n"); }

int cmd_synth(const std::string& out_dir, const SyntheticChainConfig& config) {
    auto txs = generate_chain(config);
    fs::create_directories(out_dir);
    std::string chain = out_path(out_dir, "chain.csv");
    write_transactions(chain, txs);
    json cfg = {{"seed", config.seed},
                {"days", config.days},
                {"coinbase_per_day", config.coinbase_per_day},
                {"spender_fraction", config.spender_fraction},
                {"holding", holding_json(config.holding)}};
    write_manifest(out_path(out_dir, "manifest.json"), make_manifest("synth", {}, cfg, {chain}));
    std::cout << "wrote " << chain << " (" << txs.size() << " transactions)\n";
    return 0;
}

int cmd_ingest(const std::string& input, const std::string& format, const std::string& out_dir) {
    auto loaded = load_records_any(input, format);
    fs::create_directories(out_dir);
    std::string records_path = out_path(out_dir, "records.csv");
    write_output_records(records_path, loaded.records);

    std::size_t spent = 0;
    for (const auto& r : loaded.records)
        if (r.spent_at) ++spent;
    auto span = data_span(loaded.records);
    json report = {{"mode", loaded.mode},
                   {"records", loaded.records.size()},
                   {"spent", spent},
                   {"unspent", loaded.records.size() - spent},
                   {"rejected_rows", 0}};
    if (loaded.mode == "raw") report["transactions"] = loaded.transactions;
    if (span) {
        report["first_day"] = format_day(span->first);
        report["last_day"] = format_day(span->last);
    }
    std::string report_path = out_path(out_dir, "ingest_report.json");
    write_json(report_path, report);

    json cfg = {{"format", format}};
    write_manifest(out_path(out_dir, "manifest.json"),
                   make_manifest("ingest", {input}, cfg, {records_path, report_path}));
    std::cout << "wrote " << records_path << " (" << loaded.records.size() << " records)\n";
    return 0;
}

int cmd_metrics(const std::string& input, const std::string& format, const std::string& out_dir,
                const std::optional<std::string>& from, const std::optional<std::string>& to) {
    auto loaded = load_records_any(input, format);
    auto clip = clip_flags(from, to);
    auto span = data_span(loaded.records);
    fs::create_directories(out_dir);

    MetricSeries supply, velocity, staking, wal, cdd, dilution;
    std::vector<DailyAgeDistribution> utxo_age, stxo_life;
    if (span) {
        // Replay the whole history so ages and cumulative counters are right,
        // then cut the emitted window afterwards.
        LedgerTimeline timeline = daily_snapshots(loaded.records, *span);
        supply = supply_series(timeline);
        velocity = velocity_series(timeline, supply);
        staking = staking_series(timeline);
        wal = wal_series(timeline);
        cdd = cdd_series(timeline);
        dilution = dilution_series(supply);
        utxo_age = utxo_age_distribution(timeline);
        stxo_life = stxo_lifespan_distribution(timeline);
    }

    struct Export {
        const char* file;
        const MetricSeries* series;
    };
    MetricSeries supply_cut = slice_series(supply, clip);
    MetricSeries velocity_cut = slice_series(velocity, clip);
    MetricSeries staking_cut = slice_series(staking, clip);
    MetricSeries wal_cut = slice_series(wal, clip);
    MetricSeries cdd_cut = slice_series(cdd, clip);
    MetricSeries dilution_cut = slice_series(dilution, clip);
    const Export exports[] = {
        {"supply.csv", &supply_cut}, {"velocity.csv", &velocity_cut},
        {"staking.csv", &staking_cut}, {"wal.csv", &wal_cut},
        {"cdd.csv", &cdd_cut}, {"dilution.csv", &dilution_cut},
    };
    std::vector<std::string> outputs;
    for (const auto& e : exports) {
        std::string path = out_path(out_dir, e.file);
        csv::write_file(path, csv::metric_csv(*e.series, "value"));
        outputs.push_back(path);
    }
    std::string utxo_path = out_path(out_dir, "utxo_age.csv");
    write_distribution(utxo_path, slice_distributions(utxo_age, clip));
    outputs.push_back(utxo_path);
    std::string stxo_path = out_path(out_dir, "stxo_lifespan.csv");
    write_distribution(stxo_path, slice_distributions(stxo_life, clip));
    outputs.push_back(stxo_path);

    json cfg;
    cfg["from"] = from ? json(*from) : json(nullptr);
    cfg["to"] = to ? json(*to) : json(nullptr);
    write_manifest(out_path(out_dir, "manifest.json"),
                   make_manifest("metrics", {input}, cfg, outputs));
    std::cout << "wrote " << outputs.size() << " metric files to " << out_dir << "\n";
    return 0;
}

int cmd_valuation(const std::string& input, const std::string& format, const std::string& prices,
                  const std::string& out_dir, int vol_window,
                  const std::optional<std::string>& from, const std::optional<std::string>& to) {
    auto loaded = load_records_any(input, format);
    MarketSeries market = load_price_series(prices);
    auto span = data_span(loaded.records);
    if (!span || market.empty())
        throw InputError("valuation needs both records and prices");
    DayRange market_span{market.date(0), market.date(market.size() - 1)};
    if (market_span.last < span->first || span->last < market_span.first)
        throw InputError("record and price date spans do not overlap");

    UtilityParams params;
    params.volatility_window_days = vol_window;
    LedgerTimeline timeline = daily_snapshots(loaded.records, *span);
    auto rows = compute_valuation(timeline, market, params);
    if (auto clip = clip_flags(from, to))
        std::erase_if(rows, [&](const auto& r) { return !clip->contains(r.date); });

    fs::create_directories(out_dir);
    std::string pu_path = out_path(out_dir, "pu.csv");
    write_pu_series(pu_path, rows);

    json cfg;
    cfg["vol_window"] = vol_window;
    cfg["from"] = from ? json(*from) : json(nullptr);
    cfg["to"] = to ? json(*to) : json(nullptr);
    write_manifest(out_path(out_dir, "manifest.json"),
                   make_manifest("valuation", {input, prices}, cfg, {pu_path}));
    std::cout << "wrote " << pu_path << " (" << rows.size() << " rows)\n";
    return 0;
}

int cmd_backtest(const std::string& input, const std::string& prices, const std::string& out_dir,
                 const BacktestConfig& config, const std::string& baseline, int ma_short,
                 int ma_long) {
    MarketSeries market = load_price_series(prices);
    BacktestResult result;
    std::string strategy;
    std::vector<std::string> inputs{prices};
    if (baseline == "none") {
        strategy = "pu-quantile";
        if (input.empty()) throw InputError("--input PU series is required for the PU strategy");
        inputs.insert(inputs.begin(), input);
        auto rows = load_pu_series(input);
        auto signals = generate_signals(pu_points(rows), config);
        result = run_backtest(signals, market, config);
    } else if (baseline == "buy-and-hold") {
        strategy = "buy-and-hold";
        result = buy_and_hold(market, config);
    } else if (baseline == "ma-crossover") {
        strategy = "ma-crossover";
        result = ma_crossover(market, config, ma_short, ma_long);
    } else {
        throw InputError("--baseline must be buy-and-hold or ma-crossover");
    }

    fs::create_directories(out_dir);
    std::string trades_path = out_path(out_dir, "trades.csv");
    std::string equity_path = out_path(out_dir, "equity.csv");
    std::string summary_path = out_path(out_dir, "summary.json");
    write_trades(trades_path, result.trades);
    write_equity(equity_path, result);
    json summary = summary_json(result, config, strategy);
    if (strategy == "ma-crossover") {
        summary["config"]["ma_short"] = ma_short;
        summary["config"]["ma_long"] = ma_long;
    }
    write_json(summary_path, summary);
    write_manifest(out_path(out_dir, "manifest.json"),
                   make_manifest("backtest", inputs, summary["config"],
                                 {trades_path, equity_path, summary_path}));
    std::cout << strategy << ": roi " << csv::format_double(result.roi_percent) << "% over "
              << result.trades.size() << " trades\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"UTXO-chain store-of-value analytics and PU-ratio backtesting"};
    app.require_subcommand(1);

    std::string input, prices, format = "auto", baseline = "none";
    std::string out_dir = default_out_dir();
    std::optional<std::string> from, to;
    SyntheticChainConfig synth_cfg;
    std::string holding_spec;
    BacktestConfig bt_cfg;
    int vol_window = 30, ma_short = 20, ma_long = 50;

    auto add_common = [&](CLI::App* cmd, bool needs_input) {
        auto* opt = cmd->add_option("--input", input, "input data file");
        if (needs_input) opt->required();
        cmd->add_option("--out-dir", out_dir, "output directory (default: $COINLENS_OUT or .)");
    };

    auto* synth = app.add_subcommand("synth", "generate a deterministic synthetic chain");
    add_common(synth, false);
    synth->add_option("--seed", synth_cfg.seed, "RNG seed");
    synth->add_option("--days", synth_cfg.days, "days of history");
    synth->add_option("--coinbase-per-day", synth_cfg.coinbase_per_day, "coins minted per day");
    synth->add_option("--spender-fraction", synth_cfg.spender_fraction,
                      "chance an output is ever spent");
    synth->add_option("--holding", holding_spec,
                      "holding times: exponential:MEAN | fixed:DAYS | bimodal:SHORT,LONG,MIX");

    auto* ingest = app.add_subcommand("ingest", "normalize chain data to pre-joined records");
    add_common(ingest, true);
    ingest->add_option("--format", format, "input schema: auto | prejoined | raw")
        ->check(CLI::IsMember({"auto", "prejoined", "raw"}));

    auto* metrics = app.add_subcommand("metrics", "daily cohort, WAL, CDD, and supply metrics");
    add_common(metrics, true);
    metrics->add_option("--format", format, "input schema: auto | prejoined | raw")
        ->check(CLI::IsMember({"auto", "prejoined", "raw"}));
    metrics->add_option("--from", from, "first emitted day (YYYY-MM-DD)");
    metrics->add_option("--to", to, "last emitted day (YYYY-MM-DD)");

    auto* valuation = app.add_subcommand("valuation", "price-to-utility series");
    add_common(valuation, true);
    valuation->add_option("--format", format, "input schema: auto | prejoined | raw")
        ->check(CLI::IsMember({"auto", "prejoined", "raw"}));
    valuation->add_option("--prices", prices, "daily close prices CSV")->required();
    valuation->add_option("--vol-window", vol_window, "volatility window in days");
    valuation->add_option("--from", from, "first emitted day (YYYY-MM-DD)");
    valuation->add_option("--to", to, "last emitted day (YYYY-MM-DD)");

    auto* backtest = app.add_subcommand("backtest", "trade the PU signal or a baseline");
    add_common(backtest, false);
    backtest->add_option("--prices", prices, "daily close prices CSV")->required();
    backtest->add_option("--from", from, "first trading day (YYYY-MM-DD)");
    backtest->add_option("--to", to, "last trading day (YYYY-MM-DD)");
    backtest->add_option("--capital", bt_cfg.initial_capital_usd, "starting cash in USD");
    backtest->add_option("--fee", bt_cfg.fee_rate, "proportional fee rate");
    backtest->add_option("--cap", bt_cfg.trade_cap_units, "max coins per trade");
    backtest->add_option("--buy-q", bt_cfg.buy_quantile, "buy quantile");
    backtest->add_option("--sell-q", bt_cfg.sell_quantile, "sell quantile");
    backtest->add_option("--warmup", bt_cfg.warmup_days,
                         "PU observations required before trading");
    backtest->add_option("--baseline", baseline, "run a baseline: buy-and-hold | ma-crossover");
    backtest->add_option("--ma-short", ma_short, "short moving-average window");
    backtest->add_option("--ma-long", ma_long, "long moving-average window");

    try {
        app.parse(argc, argv);
        if (!holding_spec.empty()) synth_cfg.holding = parse_holding(holding_spec);
        if (synth->parsed()) return cmd_synth(out_dir, synth_cfg);
        if (ingest->parsed()) return cmd_ingest(input, format, out_dir);
        if (metrics->parsed()) return cmd_metrics(input, format, out_dir, from, to);
        if (valuation->parsed())
            return cmd_valuation(input, format, prices, out_dir, vol_window, from, to);
        if (backtest->parsed()) {
            bt_cfg.range = clip_flags(from, to);
            return cmd_backtest(input, prices, out_dir, bt_cfg, baseline, ma_short, ma_long);
        }
        return 3;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const coinlens::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
