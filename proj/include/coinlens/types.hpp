#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "coinlens/time.hpp"

namespace coinlens {

/// Token value in integer base units; 1 coin = 10^8 base units.
using Amount = std::int64_t;

inline constexpr Amount kCoin = 100'000'000;

inline double to_coins(Amount v) { return static_cast<double>(v) / static_cast<double>(kCoin); }

/// Raised on malformed or contract-violating input data.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One transaction output with its creation and (optional) spend time.
struct OutputRecord {
    std::string tx_id;
    std::uint32_t output_index = 0;
    Amount value = 0;
    Timestamp created_at = 0;
    std::optional<Timestamp> spent_at;
    bool is_coinbase = false;

    bool operator==(const OutputRecord&) const = default;
};

/// Canonical order: created_at ascending, ties by (tx_id, output_index).
inline bool canonical_less(const OutputRecord& a, const OutputRecord& b) {
    return std::tie(a.created_at, a.tx_id, a.output_index) <
           std::tie(b.created_at, b.tx_id, b.output_index);
}

struct TxInput {
    std::string tx_id;
    std::uint32_t output_index = 0;

    bool operator==(const TxInput&) const = default;
};

struct TransactionRecord {
    std::string tx_id;
    Timestamp timestamp = 0;
    bool is_coinbase = false;
    std::vector<TxInput> inputs;
    std::vector<Amount> outputs;

    bool operator==(const TransactionRecord&) const = default;
};

/// Daily close prices in USD. Dates strictly increasing; calendar gaps allowed.
class MarketSeries {
public:
    void append(Day date, double close_usd) {
        if (!dates_.empty() && date <= dates_.back())
            throw InputError("price dates must be strictly increasing");
        if (!(close_usd > 0.0)) throw InputError("close_usd must be positive");
        dates_.push_back(date);
        closes_.push_back(close_usd);
    }

    std::size_t size() const { return dates_.size(); }
    bool empty() const { return dates_.empty(); }
    Day date(std::size_t i) const { return dates_[i]; }
    double close(std::size_t i) const { return closes_[i]; }
    const std::vector<Day>& dates() const { return dates_; }

    /// Position of `d` in the series, if present.
    std::optional<std::size_t> index_of(Day d) const {
        auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
        if (it == dates_.end() || *it != d) return std::nullopt;
        return static_cast<std::size_t>(it - dates_.begin());
    }

    std::optional<double> close_at(Day d) const {
        auto i = index_of(d);
        if (!i) return std::nullopt;
        return closes_[*i];
    }

private:
    std::vector<Day> dates_;
    std::vector<double> closes_;
};

/// A named daily scalar series over a contiguous day range.
/// Absent values stay absent (no fabricated zeros).
struct MetricSeries {
    std::string name;
    Day start{0};
    std::vector<std::optional<double>> values;

    bool empty() const { return values.empty(); }
    std::size_t size() const { return values.size(); }
    Day date(std::size_t i) const { return start + static_cast<std::int32_t>(i); }
    Day last() const { return start + static_cast<std::int32_t>(values.size()) - 1; }

    std::optional<double> at(Day d) const {
        std::int64_t i = d - start;
        if (i < 0 || i >= static_cast<std::int64_t>(values.size())) return std::nullopt;
        return values[static_cast<std::size_t>(i)];
    }
};

} // namespace coinlens
