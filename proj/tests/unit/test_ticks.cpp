#include "msirl/ticks.hpp"

#include "msirl/errors.hpp"
#include "msirl/features.hpp"
#include "msirl/rng.hpp"
#include "msirl/states.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

using namespace msirl;

namespace {

const char* kHeader =
    "timestamp,symbol,trade_price,trade_volume,bid_price,ask_price,bid_volume,ask_volume\n";

std::vector<TickRecord> random_ticks(int n, std::uint64_t seed, const SessionHours& session) {
    auto rng = make_rng(seed, "test-random-ticks");
    std::uniform_int_distribution<std::int64_t> minute(session.open_minute,
                                                       session.close_minute - 1);
    std::uniform_int_distribution<std::int64_t> ms(0, 59'999);
    std::uniform_real_distribution<double> price(50.0, 150.0);
    std::uniform_int_distribution<int> vol(0, 900);
    std::vector<TickRecord> ticks;
    const std::int64_t day0 = parse_date_ms("2012-11-05");
    for (int i = 0; i < n; ++i) {
        TickRecord t;
        t.timestamp_ms = day0 + (i % 3) * 86'400'000 + minute(rng) * 60'000 + ms(rng);
        t.symbol = "AAA";
        t.trade_price = price(rng);
        t.trade_volume = vol(rng);
        const double spread = 0.01 * (1 + vol(rng) % 40);
        t.bid_price = t.trade_price - spread / 2;
        t.ask_price = t.bid_price + spread;
        t.bid_volume = vol(rng);
        t.ask_volume = vol(rng);
        ticks.push_back(t);
    }
    std::sort(ticks.begin(), ticks.end(),
              [](const TickRecord& a, const TickRecord& b) { return a.timestamp_ms < b.timestamp_ms; });
    return ticks;
}

} // namespace

TEST_CASE("parse_tick_csv maps fields directly") {
    std::string csv = std::string(kHeader) + "1351756800000,AAA,100.5,200,100.4,100.6,500,300\n";
    auto ticks = parse_tick_csv(csv);
    REQUIRE(ticks.size() == 1);
    CHECK(ticks[0].timestamp_ms == 1351756800000);
    CHECK(ticks[0].symbol == "AAA");
    CHECK(ticks[0].trade_price == doctest::Approx(100.5));
    CHECK(ticks[0].trade_volume == 200);
    CHECK(ticks[0].spread() == doctest::Approx(0.2));
    CHECK(ticks[0].imbalance() == doctest::Approx(-200.0));
}

TEST_CASE("parse_tick_csv rejects crossed quotes") {
    std::string csv = std::string(kHeader) + "1,AAA,100,10,100,99,5,5\n";
    CHECK_THROWS_WITH_AS(parse_tick_csv(csv), doctest::Contains("CrossedQuote: line 2"), DataError);
}

TEST_CASE("parse_tick_csv on header-only input returns empty") {
    CHECK(parse_tick_csv(std::string(kHeader)).empty());
}

TEST_CASE("parse_tick_csv flags malformed rows with their line number") {
    std::string csv = std::string(kHeader) + "1,AAA,100,10,99,101,5,5\n2,AAA,oops,10,99,101,5,5\n";
    CHECK_THROWS_WITH_AS(parse_tick_csv(csv), doctest::Contains("MalformedRow: line 3"), DataError);
}

TEST_CASE("parse_tick_csv time-order policy") {
    std::string csv = std::string(kHeader) + "5,AAA,100,10,99,101,5,5\n3,AAA,100,10,99,101,5,5\n";
    CHECK_THROWS_WITH_AS(parse_tick_csv(csv), doctest::Contains("NonMonotoneTime"), DataError);
    auto sorted = parse_tick_csv(csv, TimeOrderPolicy::StableSort);
    REQUIRE(sorted.size() == 2);
    CHECK(sorted[0].timestamp_ms == 3);
    CHECK(sorted[1].timestamp_ms == 5);
}

TEST_CASE("parse after serialize is the identity") {
    SessionHours session;
    auto ticks = random_ticks(400, 7, session);
    auto round_tripped = parse_tick_csv(serialize_tick_csv(ticks));
    CHECK(round_tripped == ticks);
}

TEST_CASE("generator is deterministic per seed") {
    auto config = RegimeConfig::three_regime_default(99);
    config.num_sessions = 2;
    auto a = generate_synthetic_ticks(config);
    auto b = generate_synthetic_ticks(config);
    CHECK(serialize_tick_csv(a.ticks) == serialize_tick_csv(b.ticks));
    REQUIRE(a.labels.size() == b.labels.size());
    CHECK(a.labels.size() ==
          static_cast<std::size_t>(2 * config.session.length_minutes() / config.base_scale_minutes));

    config.seed = 100;
    auto c = generate_synthetic_ticks(config);
    CHECK(serialize_tick_csv(a.ticks) != serialize_tick_csv(c.ticks));
}

TEST_CASE("generator rejects non-stochastic transition rows") {
    auto config = RegimeConfig::three_regime_default(1);
    config.transition[1][1] = 0.5; // row now sums to 0.56
    CHECK_THROWS_AS(generate_synthetic_ticks(config), ConfigError);

    auto config2 = RegimeConfig::three_regime_default(1);
    config2.volume_rate[2] = 0.0;
    CHECK_THROWS_AS(generate_synthetic_ticks(config2), ConfigError);
}

TEST_CASE("zero-drift single regime has mean period return near zero") {
    RegimeConfig config;
    config.regime_count = 1;
    config.drift = {0.0};
    config.spread_level = {0.1};
    config.volume_rate = {8000.0};
    config.imbalance_bias = {0.0};
    config.transition = {{1.0}};
    config.seed = 11;
    config.num_sessions = 20;
    auto data = generate_synthetic_ticks(config);
    auto aggs = resample(data.ticks, config.base_scale_minutes, config.session);

    std::vector<double> returns;
    for (const auto& a : aggs) returns.push_back(a.avg_price_return);
    double mu = 0.0;
    for (double r : returns) mu += r;
    mu /= static_cast<double>(returns.size());
    double var = 0.0;
    for (double r : returns) var += (r - mu) * (r - mu);
    var /= static_cast<double>(returns.size() - 1);
    const double stderr_mean = std::sqrt(var / static_cast<double>(returns.size()));
    CHECK(std::abs(mu) < 3.0 * stderr_mean);
}

TEST_CASE("resample single bucket means") {
    const std::int64_t open = parse_date_ms("2012-11-05") + 9 * 60 * 60'000;
    std::vector<TickRecord> ticks;
    double prices[3] = {10.0, 12.0, 14.0};
    for (int i = 0; i < 3; ++i) {
        TickRecord t;
        t.timestamp_ms = open + i * 60'000;
        t.symbol = "AAA";
        t.trade_price = prices[i];
        t.trade_volume = 100 + i;
        t.bid_price = prices[i] - 0.1;
        t.ask_price = prices[i] + 0.1;
        t.bid_volume = 10;
        t.ask_volume = 30;
        ticks.push_back(t);
    }
    auto aggs = resample(ticks, 5, SessionHours{});
    REQUIRE(aggs.size() == 1);
    CHECK(aggs[0].mean_trade_price == doctest::Approx(12.0));
    CHECK(aggs[0].total_trade_volume == doctest::Approx(303.0));
    CHECK(aggs[0].tick_count == 3);
    CHECK(aggs[0].mean_quote_imbalance == doctest::Approx(20.0));
    CHECK(aggs[0].avg_price_return == 0.0);
    CHECK(aggs[0].period_start_ms == open);
}

TEST_CASE("consecutive period return is the relative mean-price change") {
    const std::int64_t open = parse_date_ms("2012-11-05") + 9 * 60 * 60'000;
    std::vector<TickRecord> ticks;
    for (int period = 0; period < 2; ++period) {
        TickRecord t;
        t.timestamp_ms = open + period * 60 * 60'000;
        t.symbol = "AAA";
        t.trade_price = period == 0 ? 100.0 : 101.0;
        t.trade_volume = 1;
        t.bid_price = t.trade_price - 0.05;
        t.ask_price = t.trade_price + 0.05;
        t.bid_volume = 1;
        t.ask_volume = 1;
        ticks.push_back(t);
    }
    auto aggs = resample(ticks, 60, SessionHours{});
    REQUIRE(aggs.size() == 2);
    CHECK(aggs[1].avg_price_return == doctest::Approx(0.01));
}

TEST_CASE("resample matches the brute-force bucketing oracle exactly") {
    SessionHours session;
    auto ticks = random_ticks(500, 3, session);
    for (int scale : {5, 15, 60}) {
        auto got = resample(ticks, scale, session);
        auto want = oracles::brute_force_resample(ticks, scale, session);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].period_start_ms == want[i].period_start_ms);
            CHECK(got[i].mean_trade_price == want[i].mean_trade_price);
            CHECK(got[i].mean_spread == want[i].mean_spread);
            CHECK(got[i].total_trade_volume == want[i].total_trade_volume);
            CHECK(got[i].mean_quote_imbalance == want[i].mean_quote_imbalance);
            CHECK(got[i].tick_count == want[i].tick_count);
            CHECK(got[i].avg_price_return == want[i].avg_price_return);
        }
    }
}

TEST_CASE("volume is conserved across scales and sums commute") {
    SessionHours session;
    auto ticks = random_ticks(800, 5, session);
    double tick_volume = 0.0;
    for (const auto& t : ticks) tick_volume += t.trade_volume;

    auto five = resample(ticks, 5, session);
    auto sixty = resample(ticks, 60, session);
    double v5 = 0.0, v60 = 0.0;
    for (const auto& a : five) v5 += a.total_trade_volume;
    for (const auto& a : sixty) v60 += a.total_trade_volume;
    CHECK(v5 == tick_volume);
    CHECK(v60 == tick_volume);

    // 12 five-minute buckets re-aggregate into the covering 60-minute bucket
    for (const auto& big : sixty) {
        double vol = 0.0;
        double weighted_price = 0.0;
        int count = 0;
        for (const auto& small : five) {
            if (small.period_start_ms >= big.period_start_ms &&
                small.period_start_ms < big.period_start_ms + 60 * 60'000) {
                vol += small.total_trade_volume;
                weighted_price += small.mean_trade_price * small.tick_count;
                count += small.tick_count;
            }
        }
        CHECK(vol == big.total_trade_volume);
        CHECK(count == big.tick_count);
        CHECK(weighted_price / count == doctest::Approx(big.mean_trade_price).epsilon(1e-12));
    }
}

TEST_CASE("resample error paths") {
    CHECK_THROWS_AS(resample({}, 5, SessionHours{}), DataError);
    SessionHours session;
    auto ticks = random_ticks(10, 2, session);
    CHECK_THROWS_WITH_AS(resample(ticks, 7, session), doctest::Contains("ScaleDoesNotDivideSession"),
                         DataError);
}

TEST_CASE("empty periods are dropped and the return chain restarts") {
    const std::int64_t open = parse_date_ms("2012-11-05") + 9 * 60 * 60'000;
    std::vector<TickRecord> ticks;
    // periods 0, 1, 3 are populated; period 2 is empty
    for (int period : {0, 1, 3}) {
        TickRecord t;
        t.timestamp_ms = open + period * 5 * 60'000;
        t.symbol = "AAA";
        t.trade_price = 100.0 + period;
        t.trade_volume = 1;
        t.bid_price = t.trade_price - 0.05;
        t.ask_price = t.trade_price + 0.05;
        t.bid_volume = 1;
        t.ask_volume = 1;
        ticks.push_back(t);
    }
    auto aggs = resample(ticks, 5, SessionHours{});
    REQUIRE(aggs.size() == 3);
    CHECK(aggs[1].avg_price_return > 0.0);
    CHECK(aggs[2].avg_price_return == 0.0); // gap before it: chain restarted
}

TEST_CASE("well-separated regimes are recoverable by state detection") {
    auto config = RegimeConfig::well_separated_three_regime(662);
    config.num_sessions = 20;
    auto data = generate_synthetic_ticks(config);
    auto aggs = resample(data.ticks, config.base_scale_minutes, config.session);
    auto pf = compute_period_features(aggs);
    auto z = apply_standardizer(fit_standardizer(pf.features), pf.features);
    auto sf = cluster_states(z, 3, derive_seed(config.seed, "states", 5), 16, 100);

    std::map<std::int64_t, int> planted;
    for (const auto& l : data.labels) planted[l.period_start_ms] = l.regime;
    std::vector<int> truth, detected;
    for (std::size_t i = 0; i < pf.features.size(); ++i) {
        truth.push_back(planted.at(pf.features[i].period_start_ms));
        detected.push_back(sf.assignments[i]);
    }
    CHECK(oracles::adjusted_rand_index(truth, detected) >= 0.8);
}

TEST_CASE("planted labels align with base-scale aggregates") {
    auto config = RegimeConfig::three_regime_default(21);
    config.num_sessions = 3;
    auto data = generate_synthetic_ticks(config);
    auto aggs = resample(data.ticks, config.base_scale_minutes, config.session);
    REQUIRE(aggs.size() == data.labels.size());
    for (std::size_t i = 0; i < aggs.size(); ++i)
        CHECK(aggs[i].period_start_ms == data.labels[i].period_start_ms);
}

TEST_CASE("labels CSV round-trips") {
    auto config = RegimeConfig::three_regime_default(5);
    config.num_sessions = 1;
    auto data = generate_synthetic_ticks(config);
    std::ostringstream out;
    serialize_labels_csv(out, data.labels);
    std::istringstream in(out.str());
    auto parsed = parse_labels_csv(in);
    REQUIRE(parsed.size() == data.labels.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].period_start_ms == data.labels[i].period_start_ms);
        CHECK(parsed[i].regime == data.labels[i].regime);
    }
}

TEST_CASE("date helpers round-trip") {
    CHECK(date_string_from_ms(parse_date_ms("2012-11-01")) == "2012-11-01");
    CHECK(weekday_from_days(parse_date_ms("2012-11-04") / 86'400'000) == 0); // a Sunday
    int y, m, d;
    civil_from_days(days_from_civil(2024, 2, 29), y, m, d);
    CHECK((y == 2024 && m == 2 && d == 29));
}
