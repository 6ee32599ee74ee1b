#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "coinlens/csv.hpp"
#include "coinlens/types.hpp"

namespace coinlens {

inline constexpr std::string_view kOutputRecordHeader =
    "tx_id,output_index,value,created_at,spent_at,is_coinbase";
inline constexpr std::string_view kTransactionHeader = "tx_id,timestamp,is_coinbase,inputs,outputs";
inline constexpr std::string_view kPriceHeader = "date,close_usd";

/// Loads pre-joined output records, validates every OutputRecord invariant,
/// and returns them in canonical order (created_at, then tx_id/output_index).
inline std::vector<OutputRecord> load_output_records(const std::string& path) {
    std::vector<OutputRecord> records;
    std::unordered_set<std::string> seen;
    csv::for_each_row(path, kOutputRecordHeader, [&](std::size_t ln, const std::vector<std::string_view>& f) {
        if (f.size() != 6) csv::fail_row(path, ln, "expected 6 fields");
        OutputRecord r;
        r.tx_id = std::string(f[0]);
        if (r.tx_id.empty()) csv::fail_row(path, ln, "empty tx_id");
        auto idx = csv::parse_uint32(f[1]);
        if (!idx) csv::fail_row(path, ln, "bad output_index '" + std::string(f[1]) + "'");
        r.output_index = *idx;
        auto value = csv::parse_int64(f[2]);
        if (!value || *value <= 0) csv::fail_row(path, ln, "value must be a positive integer");
        r.value = *value;
        auto created = parse_timestamp(f[3]);
        if (!created) csv::fail_row(path, ln, "bad created_at '" + std::string(f[3]) + "'");
        r.created_at = *created;
        if (!f[4].empty()) {
            auto spent = parse_timestamp(f[4]);
            if (!spent) csv::fail_row(path, ln, "bad spent_at '" + std::string(f[4]) + "'");
            if (*spent < r.created_at)
                csv::fail_row(path, ln, "spent_at earlier than created_at");
            r.spent_at = *spent;
        }
        auto coinbase = csv::parse_bool(f[5]);
        if (!coinbase) csv::fail_row(path, ln, "is_coinbase must be true or false");
        r.is_coinbase = *coinbase;
        std::string key = r.tx_id + ":" + std::to_string(r.output_index);
        if (!seen.insert(std::move(key)).second)
            csv::fail_row(path, ln, "duplicate output (" + r.tx_id + ", " +
                                        std::to_string(r.output_index) + ")");
        records.push_back(std::move(r));
    });
    std::sort(records.begin(), records.end(), canonical_less);
    return records;
}

/// Canonical pre-joined CSV; loading the result reproduces the sequence
/// byte-for-byte on re-export.
inline std::string output_records_csv(const std::vector<OutputRecord>& records) {
    std::ostringstream out;
    out << kOutputRecordHeader << "\n";
    for (const auto& r : records) {
        out << r.tx_id << ',' << r.output_index << ',' << r.value << ','
            << format_timestamp(r.created_at) << ',';
        if (r.spent_at) out << format_timestamp(*r.spent_at);
        out << ',' << (r.is_coinbase ? "true" : "false") << "\n";
    }
    return out.str();
}

inline void write_output_records(const std::string& path, const std::vector<OutputRecord>& records) {
    csv::write_file(path, output_records_csv(records));
}

/// Loads raw transactions sorted by timestamp (stable within ties, so an
/// input may reference an equal-timestamp transaction appearing earlier).
inline std::vector<TransactionRecord> load_transactions(const std::string& path) {
    std::vector<TransactionRecord> txs;
    csv::for_each_row(path, kTransactionHeader, [&](std::size_t ln, const std::vector<std::string_view>& f) {
        if (f.size() != 5) csv::fail_row(path, ln, "expected 5 fields");
        TransactionRecord tx;
        tx.tx_id = std::string(f[0]);
        if (tx.tx_id.empty()) csv::fail_row(path, ln, "empty tx_id");
        auto ts = parse_timestamp(f[1]);
        if (!ts) csv::fail_row(path, ln, "bad timestamp '" + std::string(f[1]) + "'");
        tx.timestamp = *ts;
        auto coinbase = csv::parse_bool(f[2]);
        if (!coinbase) csv::fail_row(path, ln, "is_coinbase must be true or false");
        tx.is_coinbase = *coinbase;
        if (!f[3].empty()) {
            for (auto part : csv::split(f[3], ';')) {
                auto colon = part.rfind(':');
                if (colon == std::string_view::npos) csv::fail_row(path, ln, "bad input reference");
                auto idx = csv::parse_uint32(part.substr(colon + 1));
                if (!idx || colon == 0)
                    csv::fail_row(path, ln, "bad input reference '" + std::string(part) + "'");
                tx.inputs.push_back(TxInput{std::string(part.substr(0, colon)), *idx});
            }
        }
        if (tx.is_coinbase && !tx.inputs.empty())
            csv::fail_row(path, ln, "coinbase transaction with non-empty inputs");
        if (!tx.is_coinbase && tx.inputs.empty())
            csv::fail_row(path, ln, "non-coinbase transaction without inputs");
        if (f[4].empty()) csv::fail_row(path, ln, "transaction without outputs");
        for (auto part : csv::split(f[4], ';')) {
            auto v = csv::parse_int64(part);
            if (!v || *v <= 0) csv::fail_row(path, ln, "output value must be a positive integer");
            tx.outputs.push_back(*v);
        }
        txs.push_back(std::move(tx));
    });
    std::stable_sort(txs.begin(), txs.end(),
                     [](const TransactionRecord& a, const TransactionRecord& b) {
                         return a.timestamp < b.timestamp;
                     });
    return txs;
}

inline std::string transactions_csv(const std::vector<TransactionRecord>& txs) {
    std::ostringstream out;
    out << kTransactionHeader << "\n";
    for (const auto& tx : txs) {
        out << tx.tx_id << ',' << tx.timestamp << ',' << (tx.is_coinbase ? "true" : "false") << ',';
        for (std::size_t i = 0; i < tx.inputs.size(); ++i) {
            if (i) out << ';';
            out << tx.inputs[i].tx_id << ':' << tx.inputs[i].output_index;
        }
        out << ',';
        for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
            if (i) out << ';';
            out << tx.outputs[i];
        }
        out << "\n";
    }
    return out.str();
}

inline void write_transactions(const std::string& path, const std::vector<TransactionRecord>& txs) {
    csv::write_file(path, transactions_csv(txs));
}

inline MarketSeries load_price_series(const std::string& path) {
    MarketSeries series;
    csv::for_each_row(path, kPriceHeader, [&](std::size_t ln, const std::vector<std::string_view>& f) {
        if (f.size() != 2) csv::fail_row(path, ln, "expected 2 fields");
        auto d = parse_day(f[0]);
        if (!d) csv::fail_row(path, ln, "unparseable date '" + std::string(f[0]) + "'");
        auto close = csv::parse_double(f[1]);
        if (!close) csv::fail_row(path, ln, "unparseable close_usd '" + std::string(f[1]) + "'");
        try {
            series.append(*d, *close);
        } catch (const InputError& e) {
            csv::fail_row(path, ln, e.what());
        }
    });
    return series;
}

inline std::string price_csv(const MarketSeries& series) {
    std::ostringstream out;
    out << kPriceHeader << "\n";
    for (std::size_t i = 0; i < series.size(); ++i)
        out << format_day(series.date(i)) << ',' << csv::format_double(series.close(i)) << "\n";
    return out.str();
}

inline void write_price_series(const std::string& path, const MarketSeries& series) {
    csv::write_file(path, price_csv(series));
}

} // namespace coinlens
