#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "coinlens/time.hpp"
#include "coinlens/types.hpp"

namespace coinlens {

/// Spend times are quantized upward to this grid, which batches outputs due
/// at the same instant into one multi-input transaction.
inline constexpr Timestamp kSpendGridSeconds = 600;

struct HoldingTimeDistribution {
    enum class Kind { Exponential, Fixed, Bimodal };

    Kind kind = Kind::Exponential;
    double a_days = 30.0; // mean (Exponential), constant (Fixed), short-mode mean (Bimodal)
    double b_days = 0.0;  // long-mode mean (Bimodal)
    double long_weight = 0.0;

    static HoldingTimeDistribution exponential(double mean_days) {
        return {Kind::Exponential, mean_days, 0.0, 0.0};
    }
    static HoldingTimeDistribution fixed(double days) { return {Kind::Fixed, days, 0.0, 0.0}; }
    static HoldingTimeDistribution bimodal(double short_mean_days, double long_mean_days,
                                           double long_weight) {
        return {Kind::Bimodal, short_mean_days, long_mean_days, long_weight};
    }

    void validate() const {
        if (!(a_days > 0.0)) throw InputError("holding time scale must be positive");
        if (kind == Kind::Bimodal) {
            if (!(b_days > 0.0)) throw InputError("long-mode mean must be positive");
            if (!(long_weight >= 0.0) || !(long_weight <= 1.0))
                throw InputError("long-mode weight must be in [0, 1]");
        }
    }

    double sample_seconds(std::mt19937_64& rng) const {
        switch (kind) {
            case Kind::Fixed:
                return a_days * kSecondsPerDay;
            case Kind::Bimodal: {
                std::bernoulli_distribution pick_long(long_weight);
                double mean = pick_long(rng) ? b_days : a_days;
                return std::exponential_distribution<double>(1.0 / (mean * kSecondsPerDay))(rng);
            }
            default:
                return std::exponential_distribution<double>(1.0 / (a_days * kSecondsPerDay))(rng);
        }
    }
};

struct SyntheticChainConfig {
    std::uint64_t seed = 42;
    int days = 100;
    double coinbase_per_day = 50.0; // coins minted by the single daily coinbase
    double spender_fraction = 0.6;  // chance an output is ever spent
    HoldingTimeDistribution holding = HoldingTimeDistribution::exponential(30.0);

    void validate() const {
        if (days < 1) throw InputError("chain must cover at least one day");
        if (!(coinbase_per_day > 0.0)) throw InputError("daily issuance must be positive");
        if (!(spender_fraction >= 0.0) || !(spender_fraction <= 1.0))
            throw InputError("spender fraction must be in [0, 1]");
        holding.validate();
    }
};

namespace detail {

inline std::string sequential_id(const char* prefix, int width, std::uint64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*llu", prefix, width,
                  static_cast<unsigned long long>(n));
    return buf;
}

} // namespace detail

/// Deterministic toy chain: one coinbase mint per day starts a value
/// lineage; each output is spent after a sampled holding time with
/// probability `spender_fraction`, and outputs falling due at the same grid
/// instant merge into a single transaction whose one output carries their
/// exact sum. No fees, so value is conserved along every lineage and total
/// issuance is exactly days x coinbase_per_day. Spends due past the last
/// generated day are dropped, leaving those outputs unspent.
/// Transactions come back ordered by timestamp.
inline std::vector<TransactionRecord> generate_chain(const SyntheticChainConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::bernoulli_distribution will_spend(config.spender_fraction);
    const Amount coinbase_value = static_cast<Amount>(std::llround(config.coinbase_per_day * kCoin));
    if (coinbase_value <= 0) throw InputError("daily issuance rounds to zero base units");

    const Timestamp horizon = day_start(Day{config.days});
    struct Pending {
        std::string src_tx;
        std::uint32_t src_idx;
        Amount value;
    };
    std::map<Timestamp, std::vector<Pending>> due;

    auto schedule = [&](const std::string& tx_id, std::uint32_t idx, Amount value,
                        Timestamp created) {
        if (!will_spend(rng)) return;
        double h = config.holding.sample_seconds(rng);
        Timestamp raw = created + std::max<Timestamp>(1, static_cast<Timestamp>(h));
        Timestamp at = (raw + kSpendGridSeconds - 1) / kSpendGridSeconds * kSpendGridSeconds;
        if (at >= horizon) return;
        due[at].push_back(Pending{tx_id, idx, value});
    };

    std::vector<TransactionRecord> txs;
    std::uint64_t spend_count = 0;
    int cb_day = 0;
    constexpr Timestamp kNever = std::numeric_limits<Timestamp>::max();

    while (true) {
        Timestamp cb_time = cb_day < config.days ? day_start(Day{cb_day}) : kNever;
        Timestamp sp_time = due.empty() ? kNever : due.begin()->first;
        if (cb_time == kNever && sp_time == kNever) break;

        if (cb_time <= sp_time) {
            TransactionRecord tx;
            tx.tx_id = detail::sequential_id("cb-", 6, static_cast<std::uint64_t>(cb_day));
            tx.timestamp = cb_time;
            tx.is_coinbase = true;
            tx.outputs.push_back(coinbase_value);
            schedule(tx.tx_id, 0, coinbase_value, tx.timestamp);
            txs.push_back(std::move(tx));
            ++cb_day;
        } else {
            auto group = std::move(due.begin()->second);
            due.erase(due.begin());
            TransactionRecord tx;
            tx.tx_id = detail::sequential_id("tx-", 8, spend_count++);
            tx.timestamp = sp_time;
            tx.is_coinbase = false;
            Amount total = 0;
            for (const auto& p : group) {
                tx.inputs.push_back(TxInput{p.src_tx, p.src_idx});
                total += p.value;
            }
            tx.outputs.push_back(total);
            schedule(tx.tx_id, 0, total, tx.timestamp);
            txs.push_back(std::move(tx));
        }
    }
    return txs;
}

} // namespace coinlens
