#include "msirl/ticks.hpp"

#include "msirl/errors.hpp"
#include "msirl/numeric.hpp"
#include "msirl/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace msirl {

namespace {

constexpr std::int64_t kMsPerMinute = 60'000;
constexpr std::int64_t kMsPerDay = 86'400'000;

const char* kTickHeader =
    "timestamp,symbol,trade_price,trade_volume,bid_price,ask_price,bid_volume,ask_volume";

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

double parse_field_double(std::string_view s, std::size_t line_no, const char* name) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError("MalformedRow: line " + std::to_string(line_no) + ", field " + name);
    return v;
}

std::int64_t parse_field_int64(std::string_view s, std::size_t line_no, const char* name) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError("MalformedRow: line " + std::to_string(line_no) + ", field " + name);
    return v;
}

} // namespace

// --- time helpers -----------------------------------------------------------

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    year = static_cast<int>(y + (month <= 2));
}

std::int64_t parse_date_ms(const std::string& iso_date) {
    int y = 0, m = 0, d = 0;
    if (std::sscanf(iso_date.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 || d > 31)
        throw ConfigError("invalid date: " + iso_date);
    return days_from_civil(y, m, d) * kMsPerDay;
}

std::string date_string_from_ms(std::int64_t timestamp_ms) {
    int y, m, d;
    civil_from_days(day_index(timestamp_ms), y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

// --- CSV --------------------------------------------------------------------

std::vector<TickRecord> parse_tick_csv(std::istream& in, TimeOrderPolicy policy) {
    std::string line;
    if (!std::getline(in, line))
        throw DataError("empty tick CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTickHeader)
        throw DataError("unexpected tick CSV header: " + line);

    std::vector<TickRecord> ticks;
    std::unordered_map<std::string, std::int64_t> last_ts;
    bool needs_sort = false;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 8)
            throw DataError("MalformedRow: line " + std::to_string(line_no) + ", expected 8 fields, got " +
                            std::to_string(f.size()));
        TickRecord t;
        t.timestamp_ms = parse_field_int64(f[0], line_no, "timestamp");
        t.symbol = std::string(f[1]);
        t.trade_price = parse_field_double(f[2], line_no, "trade_price");
        t.trade_volume = parse_field_double(f[3], line_no, "trade_volume");
        t.bid_price = parse_field_double(f[4], line_no, "bid_price");
        t.ask_price = parse_field_double(f[5], line_no, "ask_price");
        t.bid_volume = parse_field_double(f[6], line_no, "bid_volume");
        t.ask_volume = parse_field_double(f[7], line_no, "ask_volume");

        if (t.symbol.empty())
            throw DataError("MalformedRow: line " + std::to_string(line_no) + ", empty symbol");
        if (!(t.trade_price > 0.0))
            throw DataError("MalformedRow: line " + std::to_string(line_no) + ", trade_price must be > 0");
        if (t.trade_volume < 0.0 || t.bid_volume < 0.0 || t.ask_volume < 0.0 || t.bid_price < 0.0 ||
            t.ask_price < 0.0)
            throw DataError("MalformedRow: line " + std::to_string(line_no) + ", negative field");
        if (t.bid_price > 0.0 && t.ask_price > 0.0 && t.ask_price < t.bid_price)
            throw DataError("CrossedQuote: line " + std::to_string(line_no));

        auto [it, inserted] = last_ts.try_emplace(t.symbol, t.timestamp_ms);
        if (!inserted) {
            if (t.timestamp_ms < it->second) {
                if (policy == TimeOrderPolicy::Reject)
                    throw DataError("NonMonotoneTime: line " + std::to_string(line_no));
                needs_sort = true;
            }
            it->second = std::max(it->second, t.timestamp_ms);
        }
        ticks.push_back(std::move(t));
    }
    if (needs_sort)
        std::stable_sort(ticks.begin(), ticks.end(),
                         [](const TickRecord& a, const TickRecord& b) { return a.timestamp_ms < b.timestamp_ms; });
    return ticks;
}

std::vector<TickRecord> parse_tick_csv(const std::string& text, TimeOrderPolicy policy) {
    std::istringstream in(text);
    return parse_tick_csv(in, policy);
}

void serialize_tick_csv(std::ostream& out, const std::vector<TickRecord>& ticks) {
    out << kTickHeader << '\n';
    for (const auto& t : ticks) {
        out << t.timestamp_ms << ',' << t.symbol << ',' << format_double(t.trade_price) << ','
            << format_double(t.trade_volume) << ',' << format_double(t.bid_price) << ','
            << format_double(t.ask_price) << ',' << format_double(t.bid_volume) << ','
            << format_double(t.ask_volume) << '\n';
    }
}

std::string serialize_tick_csv(const std::vector<TickRecord>& ticks) {
    std::ostringstream out;
    serialize_tick_csv(out, ticks);
    return out.str();
}

void serialize_labels_csv(std::ostream& out, const std::vector<PlantedLabel>& labels) {
    out << "period_start,symbol,regime\n";
    for (const auto& l : labels)
        out << l.period_start_ms << ',' << l.symbol << ',' << l.regime << '\n';
}

std::vector<PlantedLabel> parse_labels_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw DataError("empty labels CSV");
    std::vector<PlantedLabel> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 3)
            throw DataError("MalformedRow: line " + std::to_string(line_no));
        PlantedLabel l;
        l.period_start_ms = parse_field_int64(f[0], line_no, "period_start");
        l.symbol = std::string(f[1]);
        l.regime = static_cast<int>(parse_field_int64(f[2], line_no, "regime"));
        labels.push_back(std::move(l));
    }
    return labels;
}

void serialize_aggregates_csv(std::ostream& out, const std::vector<PeriodAggregate>& aggs) {
    out << "period_start,scale_minutes,mean_trade_price,mean_spread,total_trade_volume,"
           "mean_quote_imbalance,tick_count,avg_price_return\n";
    for (const auto& a : aggs) {
        out << a.period_start_ms << ',' << a.scale_minutes << ',' << format_double(a.mean_trade_price)
            << ',' << format_double(a.mean_spread) << ',' << format_double(a.total_trade_volume) << ','
            << format_double(a.mean_quote_imbalance) << ',' << a.tick_count << ','
            << format_double(a.avg_price_return) << '\n';
    }
}

// --- synthetic generator -----------------------------------------------------

void RegimeConfig::validate() const {
    if (regime_count < 1) throw ConfigError("InvalidConfig: regime_count must be >= 1");
    auto check_size = [&](const std::vector<double>& v, const char* name) {
        if (static_cast<int>(v.size()) != regime_count)
            throw ConfigError(std::string("InvalidConfig: ") + name + " must have one entry per regime");
    };
    check_size(drift, "drift");
    check_size(spread_level, "spread_level");
    check_size(volume_rate, "volume_rate");
    check_size(imbalance_bias, "imbalance_bias");
    auto check_trend = [&](const std::vector<double>& v, const char* name) {
        if (!v.empty() && static_cast<int>(v.size()) != regime_count)
            throw ConfigError(std::string("InvalidConfig: ") + name +
                              " must be empty or have one entry per regime");
    };
    check_trend(spread_trend, "spread_trend");
    check_trend(volume_trend, "volume_trend");
    check_trend(imbalance_trend, "imbalance_trend");
    if (static_cast<int>(transition.size()) != regime_count)
        throw ConfigError("InvalidConfig: transition matrix must be square in regime_count");
    for (const auto& row : transition) {
        if (static_cast<int>(row.size()) != regime_count)
            throw ConfigError("InvalidConfig: transition matrix must be square in regime_count");
        double s = 0.0;
        for (double p : row) {
            if (p < 0.0) throw ConfigError("InvalidConfig: negative transition probability");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw ConfigError("InvalidConfig: transition row does not sum to 1");
    }
    for (double r : volume_rate)
        if (!(r > 0.0)) throw ConfigError("InvalidConfig: volume rates must be positive");
    for (double s : spread_level)
        if (!(s > 0.0)) throw ConfigError("InvalidConfig: spread levels must be positive");
    if (!(ticks_per_minute > 0.0)) throw ConfigError("InvalidConfig: ticks_per_minute must be positive");
    if (!(start_price > 0.0)) throw ConfigError("InvalidConfig: start_price must be positive");
    if (mean_reversion < 0.0 || mean_reversion > 1.0)
        throw ConfigError("InvalidConfig: mean_reversion must be in [0, 1]");
    if (!(level_reversion > 0.0) || level_reversion > 1.0)
        throw ConfigError("InvalidConfig: level_reversion must be in (0, 1]");
    if (num_sessions < 1) throw ConfigError("InvalidConfig: num_sessions must be >= 1");
    if (session.open_minute < 0 || session.close_minute > 24 * 60)
        throw ConfigError("InvalidConfig: session must lie within one UTC day");
    if (base_scale_minutes < 1 || session.length_minutes() <= 0 ||
        session.length_minutes() % base_scale_minutes != 0)
        throw ConfigError("InvalidConfig: base scale must divide the session length");
    if (symbols.empty()) throw ConfigError("InvalidConfig: at least one symbol");
}

RegimeConfig RegimeConfig::three_regime_default(std::uint64_t seed) {
    RegimeConfig c;
    c.regime_count = 3;
    c.drift = {-0.001, 0.0, 0.001};
    c.spread_level = {0.05, 0.12, 0.25};
    c.volume_rate = {4000.0, 9000.0, 16000.0};
    c.imbalance_bias = {-250.0, 0.0, 250.0};
    c.transition = {
        {0.94, 0.03, 0.03},
        {0.03, 0.94, 0.03},
        {0.03, 0.03, 0.94},
    };
    c.mean_reversion = 0.01;
    c.seed = seed;
    return c;
}

RegimeConfig RegimeConfig::well_separated_three_regime(std::uint64_t seed) {
    RegimeConfig c;
    c.regime_count = 3;
    c.drift = {-0.0015, 0.0, 0.0015};
    c.spread_level = {0.12, 0.12, 0.12};
    c.volume_rate = {8000.0, 8000.0, 8000.0};
    c.imbalance_bias = {0.0, 0.0, 0.0};
    c.spread_trend = {-0.02, 0.0, 0.02};
    c.volume_trend = {0.0, 0.0, 0.0};
    c.imbalance_trend = {-0.02, 0.0, 0.02};
    // cyclic chain keeps the three regimes evenly represented
    c.transition = {
        {0.92, 0.08, 0.0},
        {0.0, 0.92, 0.08},
        {0.08, 0.0, 0.92},
    };
    c.ticks_per_minute = 6.0;
    c.mean_reversion = 0.002;
    c.level_reversion = 0.008;
    c.price_noise = 1e-5;
    c.spread_noise = 0.02;
    c.volume_noise = 0.25;
    c.imbalance_noise = 20.0;
    c.quote_depth = 2000.0;
    c.seed = seed;
    return c;
}

SyntheticTicks generate_synthetic_ticks(const RegimeConfig& config) {
    config.validate();

    SyntheticTicks out;
    const std::int64_t base_ms = static_cast<std::int64_t>(config.base_scale_minutes) * kMsPerMinute;
    const int periods_per_session = config.session.length_minutes() / config.base_scale_minutes;
    const double ticks_per_period = config.ticks_per_minute * config.base_scale_minutes;

    // Session days: consecutive weekdays from start_date.
    std::vector<std::int64_t> session_days;
    std::int64_t day = parse_date_ms(config.start_date) / kMsPerDay;
    while (static_cast<int>(session_days.size()) < config.num_sessions) {
        int wd = weekday_from_days(day);
        if (wd != 0 && wd != 6) session_days.push_back(day);
        ++day;
    }

    for (std::size_t sym_idx = 0; sym_idx < config.symbols.size(); ++sym_idx) {
        const std::string& symbol = config.symbols[sym_idx];
        auto rng = make_rng(config.seed, "synthetic-ticks", sym_idx);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::poisson_distribution<int> tick_count_dist(ticks_per_period);

        double price = config.start_price;
        int regime = 0;
        // Level walks; each period they take one trend step and revert toward
        // the active regime's anchor.
        double spread_walk = config.spread_level[0];
        double volume_walk = config.volume_rate[0];
        double imbalance_walk = config.imbalance_bias[0];

        auto trend_of = [](const std::vector<double>& trend, int r) {
            return trend.empty() ? 0.0 : trend[r];
        };

        for (std::int64_t session_day : session_days) {
            const std::int64_t open_ms =
                session_day * kMsPerDay + static_cast<std::int64_t>(config.session.open_minute) * kMsPerMinute;
            for (int p = 0; p < periods_per_session; ++p) {
                const std::int64_t period_start = open_ms + p * base_ms;
                out.labels.push_back({period_start, symbol, regime});

                spread_walk += config.spread_level[regime] * trend_of(config.spread_trend, regime) +
                               config.level_reversion * (config.spread_level[regime] - spread_walk);
                spread_walk = std::max(spread_walk, 0.01);
                volume_walk += config.volume_rate[regime] * trend_of(config.volume_trend, regime) +
                               config.level_reversion * (config.volume_rate[regime] - volume_walk);
                volume_walk = std::max(volume_walk, 1.0);
                imbalance_walk += config.quote_depth * trend_of(config.imbalance_trend, regime) +
                                  config.level_reversion *
                                      (config.imbalance_bias[regime] - imbalance_walk);

                const int n_ticks = std::max(1, tick_count_dist(rng));
                std::vector<std::int64_t> offsets(n_ticks);
                std::uniform_int_distribution<std::int64_t> offset_dist(0, base_ms - 1);
                for (auto& o : offsets) o = offset_dist(rng);
                std::sort(offsets.begin(), offsets.end());

                // Arithmetic price walk anchored at start_price: drift and
                // noise are fractions of the anchor, so period price changes
                // carry the regime signature at any price level.
                const double per_tick_drift = config.drift[regime] / ticks_per_period;
                for (int i = 0; i < n_ticks; ++i) {
                    const double pull = config.mean_reversion / ticks_per_period *
                                        (config.start_price - price) / config.start_price;
                    price += config.start_price *
                             (per_tick_drift + pull + config.price_noise * gauss(rng));
                    price = std::max(price, 0.01);

                    double spread = spread_walk * (1.0 + config.spread_noise * gauss(rng));
                    spread = std::max(spread, 0.01);

                    double vol = volume_walk / ticks_per_period *
                                 std::max(0.0, 1.0 + config.volume_noise * gauss(rng));
                    double imb = imbalance_walk + config.imbalance_noise * gauss(rng);

                    TickRecord t;
                    t.timestamp_ms = period_start + offsets[i];
                    t.symbol = symbol;
                    t.trade_price = price;
                    t.trade_volume = std::round(vol);
                    t.bid_price = std::max(0.01, price - spread / 2.0);
                    t.ask_price = t.bid_price + spread;
                    t.bid_volume = std::max(0.0, std::round(config.quote_depth - imb / 2.0));
                    t.ask_volume = std::max(0.0, std::round(config.quote_depth + imb / 2.0));
                    out.ticks.push_back(std::move(t));
                }

                // Regime chain steps once per base period.
                if (config.regime_count > 1) {
                    std::uniform_real_distribution<double> u(0.0, 1.0);
                    double x = u(rng);
                    double cum = 0.0;
                    int next = config.regime_count - 1;
                    for (int r = 0; r < config.regime_count; ++r) {
                        cum += config.transition[regime][r];
                        if (x < cum) {
                            next = r;
                            break;
                        }
                    }
                    regime = next;
                }
            }
        }
    }

    // Interleave symbols by time; stable so per-symbol order is preserved.
    std::stable_sort(out.ticks.begin(), out.ticks.end(),
                     [](const TickRecord& a, const TickRecord& b) { return a.timestamp_ms < b.timestamp_ms; });
    std::stable_sort(out.labels.begin(), out.labels.end(), [](const PlantedLabel& a, const PlantedLabel& b) {
        return a.period_start_ms < b.period_start_ms;
    });
    return out;
}

// --- resampling ---------------------------------------------------------------

std::vector<PeriodAggregate> resample(const std::vector<TickRecord>& ticks, int scale_minutes,
                                      const SessionHours& session) {
    if (ticks.empty()) throw DataError("EmptyInput: no ticks to resample");
    if (scale_minutes < 1 || session.length_minutes() <= 0 ||
        session.length_minutes() % scale_minutes != 0)
        throw DataError("ScaleDoesNotDivideSession: scale " + std::to_string(scale_minutes) +
                        " min vs session of " + std::to_string(session.length_minutes()) + " min");

    const std::int64_t scale_ms = static_cast<std::int64_t>(scale_minutes) * kMsPerMinute;
    const std::int64_t open_off = static_cast<std::int64_t>(session.open_minute) * kMsPerMinute;
    const std::int64_t close_off = static_cast<std::int64_t>(session.close_minute) * kMsPerMinute;

    const std::string& symbol = ticks.front().symbol;
    std::vector<PeriodAggregate> out;

    std::int64_t cur_period = -1;
    double sum_price = 0.0, sum_spread = 0.0, sum_volume = 0.0, sum_imbalance = 0.0;
    int count = 0;
    std::int64_t prev_ts = ticks.front().timestamp_ms;

    auto flush = [&]() {
        if (count == 0) return;
        PeriodAggregate a;
        a.period_start_ms = cur_period;
        a.scale_minutes = scale_minutes;
        a.mean_trade_price = sum_price / count;
        a.mean_spread = sum_spread / count;
        a.total_trade_volume = sum_volume;
        a.mean_quote_imbalance = sum_imbalance / count;
        a.tick_count = count;
        a.avg_price_return = 0.0;
        out.push_back(a);
        sum_price = sum_spread = sum_volume = sum_imbalance = 0.0;
        count = 0;
    };

    for (const auto& t : ticks) {
        if (t.symbol != symbol)
            throw DataError("resample expects a single symbol, saw " + symbol + " and " + t.symbol);
        if (t.timestamp_ms < prev_ts) throw DataError("resample expects time-sorted ticks");
        prev_ts = t.timestamp_ms;

        const std::int64_t ms_of_day = t.timestamp_ms % kMsPerDay;
        if (ms_of_day < open_off || ms_of_day >= close_off) continue; // outside session
        const std::int64_t day_ms = t.timestamp_ms - ms_of_day;
        const std::int64_t period = day_ms + open_off + ((ms_of_day - open_off) / scale_ms) * scale_ms;

        if (period != cur_period) {
            flush();
            cur_period = period;
        }
        sum_price += t.trade_price;
        sum_spread += t.spread();
        sum_volume += t.trade_volume;
        sum_imbalance += t.imbalance();
        ++count;
    }
    flush();

    if (out.empty()) throw DataError("EmptyInput: no ticks inside the session window");

    // Returns: relative change of mean price vs the previous contiguous period
    // of the same session; chain heads (session start or gap) stay at 0.
    for (std::size_t i = 1; i < out.size(); ++i) {
        const bool same_session = day_index(out[i].period_start_ms) == day_index(out[i - 1].period_start_ms);
        const bool contiguous = out[i].period_start_ms == out[i - 1].period_start_ms + scale_ms;
        if (same_session && contiguous)
            out[i].avg_price_return =
                (out[i].mean_trade_price - out[i - 1].mean_trade_price) / out[i - 1].mean_trade_price;
    }
    return out;
}

} // namespace msirl
