#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace msirl {

// ---------------------------------------------------------------------------
// Tick data model: trade prints with the prevailing top-of-book quote.
// Timestamps are integer milliseconds UTC.
// ---------------------------------------------------------------------------

struct TickRecord {
    std::int64_t timestamp_ms = 0;
    std::string symbol;
    double trade_price = 0.0;  // > 0
    double trade_volume = 0.0; // shares, >= 0
    double bid_price = 0.0;
    double ask_price = 0.0;
    double bid_volume = 0.0;
    double ask_volume = 0.0;

    double spread() const { return ask_price - bid_price; }
    // Quote volume imbalance, signed as ask volume minus bid volume.
    double imbalance() const { return ask_volume - bid_volume; }

    bool operator==(const TickRecord&) const = default;
};

// Trading session window, minutes from midnight UTC. Period alignment is
// anchored at session open, and aggregates never span sessions.
struct SessionHours {
    int open_minute = 9 * 60;
    int close_minute = 17 * 60;

    int length_minutes() const { return close_minute - open_minute; }
};

struct PeriodAggregate {
    std::int64_t period_start_ms = 0;
    int scale_minutes = 0;
    double mean_trade_price = 0.0;
    double mean_spread = 0.0;
    double total_trade_volume = 0.0;
    double mean_quote_imbalance = 0.0;
    int tick_count = 0;
    // Relative change of the period's mean trade price versus the previous
    // period's. The first period of a session, and the first period after a
    // gap, carry return 0.
    double avg_price_return = 0.0;
};

// ---------------------------------------------------------------------------
// Synthetic tick generator: a hidden Markov regime chain, stepped once per
// base-scale period, modulates drift, spread level, trade volume rate and
// quote imbalance. Fully determined by `seed`.
// ---------------------------------------------------------------------------

struct RegimeConfig {
    int regime_count = 3;
    std::vector<double> drift;            // price trend, fraction of start_price per base period
    std::vector<double> spread_level;     // currency; anchor the spread walk reverts to
    std::vector<double> volume_rate;      // shares per base period; anchor of the volume walk
    std::vector<double> imbalance_bias;   // shares (ask minus bid side); anchor of the imbalance walk
    std::vector<std::vector<double>> transition; // row-stochastic, regime_count^2

    // Optional per-regime trends on the level channels, as a fraction of the
    // channel scale per base period (imbalance scales by quote_depth). Empty
    // means no trend. With trends, regimes imprint on the period-to-period
    // *changes* of spread / volume / imbalance, not only on their levels.
    std::vector<double> spread_trend;
    std::vector<double> volume_trend;
    std::vector<double> imbalance_trend;

    SessionHours session;
    double ticks_per_minute = 2.0;
    std::uint64_t seed = 42;

    std::vector<std::string> symbols = {"SYN"};
    std::string start_date = "2012-11-01"; // first session, weekends skipped
    int num_sessions = 20;
    int base_scale_minutes = 5;
    double start_price = 100.0;
    double mean_reversion = 0.0;   // per-period price pull toward start_price, 0 = pure walk
    double level_reversion = 1.0;  // per-period pull of level walks toward the regime anchor;
                                   // 1 snaps levels to the anchor each period
    double price_noise = 5e-4;     // per-tick price noise sd, fraction of start_price
    double spread_noise = 0.10;    // relative sd of per-tick spread around its walk
    double volume_noise = 0.50;    // relative dispersion of per-tick volume
    double imbalance_noise = 40.0; // shares, per-tick sd around the imbalance walk
    double quote_depth = 500.0;    // base resting volume per side

    // Throws ConfigError if rows are not stochastic or rates are not positive.
    void validate() const;

    // Regimes distinct in their levels; changes carry no regime signal.
    static RegimeConfig three_regime_default(std::uint64_t seed);
    // Regimes distinct in their trends: price drift, spread and imbalance
    // changes separate cleanly in feature space, so downstream state
    // detection can recover the planted labels.
    static RegimeConfig well_separated_three_regime(std::uint64_t seed);
};

// Planted regime label for one (symbol, base period); the generator keeps
// these so downstream state detection can be scored against ground truth.
struct PlantedLabel {
    std::int64_t period_start_ms = 0;
    std::string symbol;
    int regime = 0;
};

struct SyntheticTicks {
    std::vector<TickRecord> ticks;      // time-sorted across symbols
    std::vector<PlantedLabel> labels;   // one per non-empty base period
};

SyntheticTicks generate_synthetic_ticks(const RegimeConfig& config);

// ---------------------------------------------------------------------------
// CSV parsing and serialization. Column set is fixed:
//   timestamp,symbol,trade_price,trade_volume,bid_price,ask_price,bid_volume,ask_volume
// ---------------------------------------------------------------------------

enum class TimeOrderPolicy {
    Reject,     // non-monotone timestamps per symbol raise DataError
    StableSort, // stable-sort rows by timestamp instead
};

std::vector<TickRecord> parse_tick_csv(std::istream& in,
                                       TimeOrderPolicy policy = TimeOrderPolicy::Reject);
std::vector<TickRecord> parse_tick_csv(const std::string& text,
                                       TimeOrderPolicy policy = TimeOrderPolicy::Reject);

void serialize_tick_csv(std::ostream& out, const std::vector<TickRecord>& ticks);
std::string serialize_tick_csv(const std::vector<TickRecord>& ticks);

void serialize_labels_csv(std::ostream& out, const std::vector<PlantedLabel>& labels);
std::vector<PlantedLabel> parse_labels_csv(std::istream& in);

void serialize_aggregates_csv(std::ostream& out, const std::vector<PeriodAggregate>& aggs);

// ---------------------------------------------------------------------------
// Calendar resampling. Ticks must be time-sorted and single-symbol; ticks
// outside the session window are ignored. Empty periods are dropped and the
// return chain restarts after the gap.
// ---------------------------------------------------------------------------

std::vector<PeriodAggregate> resample(const std::vector<TickRecord>& ticks,
                                      int scale_minutes,
                                      const SessionHours& session);

// --- time helpers (proleptic Gregorian, UTC) -------------------------------

std::int64_t days_from_civil(int year, int month, int day);
void civil_from_days(std::int64_t days, int& year, int& month, int& day);
std::int64_t parse_date_ms(const std::string& iso_date); // "YYYY-MM-DD" -> ms at midnight
std::string date_string_from_ms(std::int64_t timestamp_ms);
inline std::int64_t day_index(std::int64_t timestamp_ms) {
    // timestamps are non-negative in this artifact; plain division is fine
    return timestamp_ms / 86'400'000;
}
inline int weekday_from_days(std::int64_t days) { // 0 = Sunday
    return static_cast<int>((days + 4) % 7);
}

} // namespace msirl
