#include "msirl/features.hpp"

#include "msirl/errors.hpp"
#include "msirl/rng.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace msirl;

namespace {

PeriodAggregate make_agg(std::int64_t start, int scale, double price, double spread, double volume,
                         double imbalance) {
    PeriodAggregate a;
    a.period_start_ms = start;
    a.scale_minutes = scale;
    a.mean_trade_price = price;
    a.mean_spread = spread;
    a.total_trade_volume = volume;
    a.mean_quote_imbalance = imbalance;
    a.tick_count = 1;
    return a;
}

std::vector<PeriodAggregate> random_aggs(int n, std::uint64_t seed) {
    auto rng = make_rng(seed, "test-aggs");
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<PeriodAggregate> out;
    const std::int64_t open = parse_date_ms("2012-11-05") + 9 * 60 * 60'000;
    for (int i = 0; i < n; ++i)
        out.push_back(make_agg(open + i * 5 * 60'000, 5, 100 + u(rng), 0.1 + 0.05 * u(rng),
                               5000 + 1000 * u(rng), 100 * u(rng)));
    return out;
}

} // namespace

TEST_CASE("single difference of mean price") {
    const std::int64_t open = parse_date_ms("2012-11-05") + 9 * 60 * 60'000;
    std::vector<PeriodAggregate> aggs = {make_agg(open, 5, 100, 0.1, 10, 5),
                                         make_agg(open + 5 * 60'000, 5, 101, 0.1, 10, 5)};
    auto pf = compute_period_features(aggs);
    REQUIRE(pf.features.size() == 1);
    CHECK(pf.features[0].v == Point4{1.0, 0.0, 0.0, 0.0});
    CHECK(pf.aggregate_index[0] == 1);
    CHECK(pf.features[0].period_start_ms == aggs[1].period_start_ms);
}

TEST_CASE("constant aggregates give all-zero features") {
    auto aggs = random_aggs(1, 1);
    aggs.resize(5, aggs[0]);
    for (int i = 0; i < 5; ++i) aggs[i].period_start_ms = aggs[0].period_start_ms + i * 5 * 60'000;
    auto pf = compute_period_features(aggs);
    REQUIRE(pf.features.size() == 4);
    for (const auto& f : pf.features) CHECK(f.v == Point4{0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("first differences match a pairwise-difference oracle exactly") {
    auto aggs = random_aggs(50, 2);
    auto pf = compute_period_features(aggs);
    REQUIRE(pf.features.size() == 49);
    for (std::size_t i = 1; i < aggs.size(); ++i) {
        const auto& f = pf.features[i - 1];
        CHECK(f.v[0] == aggs[i].mean_trade_price - aggs[i - 1].mean_trade_price);
        CHECK(f.v[1] == aggs[i].mean_spread - aggs[i - 1].mean_spread);
        CHECK(f.v[2] == aggs[i].total_trade_volume - aggs[i - 1].total_trade_volume);
        CHECK(f.v[3] == aggs[i].mean_quote_imbalance - aggs[i - 1].mean_quote_imbalance);
    }
}

TEST_CASE("session boundaries and gaps break the difference chain") {
    const std::int64_t day1 = parse_date_ms("2012-11-05") + 9 * 60 * 60'000;
    const std::int64_t day2 = parse_date_ms("2012-11-06") + 9 * 60 * 60'000;
    std::vector<PeriodAggregate> aggs = {
        make_agg(day1, 5, 100, 0.1, 10, 0), make_agg(day1 + 5 * 60'000, 5, 101, 0.1, 10, 0),
        make_agg(day1 + 15 * 60'000, 5, 103, 0.1, 10, 0), // gap: period 2 missing
        make_agg(day2, 5, 104, 0.1, 10, 0), make_agg(day2 + 5 * 60'000, 5, 105, 0.1, 10, 0)};
    auto pf = compute_period_features(aggs);
    // chains: {0,1}, {2}, {3,4} -> diffs only inside chains with >= 2 periods
    REQUIRE(pf.features.size() == 2);
    CHECK(pf.aggregate_index[0] == 1);
    CHECK(pf.aggregate_index[1] == 4);
}

TEST_CASE("too few periods") {
    auto aggs = random_aggs(1, 3);
    CHECK_THROWS_WITH_AS(compute_period_features(aggs), doctest::Contains("TooFewPeriods"), DataError);
}

TEST_CASE("output length is input length minus the number of sessions") {
    auto config = RegimeConfig::three_regime_default(17);
    config.num_sessions = 4;
    auto data = generate_synthetic_ticks(config);
    auto aggs = resample(data.ticks, 15, config.session);
    auto pf = compute_period_features(aggs);
    CHECK(pf.features.size() == aggs.size() - 4);
}

TEST_CASE("features telescope to last minus first within a session") {
    auto config = RegimeConfig::three_regime_default(19);
    config.num_sessions = 1;
    auto data = generate_synthetic_ticks(config);
    auto aggs = resample(data.ticks, 5, config.session);
    auto pf = compute_period_features(aggs);
    double sum = 0.0;
    for (const auto& f : pf.features) sum += f.d_price();
    CHECK(sum ==
          doctest::Approx(aggs.back().mean_trade_price - aggs.front().mean_trade_price).epsilon(1e-9));
}

TEST_CASE("standardizer on a two-point sample") {
    FeatureVector a, b;
    a.v = {0, 0, 0, 0};
    b.v = {2, 0, 0, 0};
    auto s = fit_standardizer({a, b});
    CHECK(s.mean == Point4{1.0, 0.0, 0.0, 0.0});
    CHECK(s.std[0] == doctest::Approx(1.0));
    CHECK_FALSE(s.constant[0]);
    CHECK(s.constant[1]);
    CHECK(s.constant[2]);
    CHECK(s.constant[3]);
}

TEST_CASE("standardizer requires two samples") {
    FeatureVector a;
    CHECK_THROWS_WITH_AS(fit_standardizer({a}), doctest::Contains("TooFewSamples"), DataError);
}

TEST_CASE("standardizer matches the two-pass oracle and recenters") {
    auto aggs = random_aggs(200, 4);
    auto pf = compute_period_features(aggs);
    auto s = fit_standardizer(pf.features);
    for (int d = 0; d < kFeatureDim; ++d) {
        std::vector<double> xs;
        for (const auto& f : pf.features) xs.push_back(f.v[d]);
        auto [mu, sd] = oracles::two_pass_mean_std(xs);
        CHECK(s.mean[d] == doctest::Approx(mu).epsilon(1e-12));
        CHECK(s.std[d] == doctest::Approx(sd).epsilon(1e-12));
    }

    auto z = apply_standardizer(s, pf.features);
    for (int d = 0; d < kFeatureDim; ++d) {
        double mu = 0.0, var = 0.0;
        for (const auto& f : z) mu += f.v[d];
        mu /= static_cast<double>(z.size());
        for (const auto& f : z) var += (f.v[d] - mu) * (f.v[d] - mu);
        var /= static_cast<double>(z.size());
        CHECK(std::abs(mu) < 1e-9);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("apply at the mean and one sigma out") {
    FeatureVector a, b;
    a.v = {1, 2, 3, 4};
    b.v = {3, 6, 9, 12};
    auto s = fit_standardizer({a, b});
    FeatureVector at_mean;
    at_mean.v = s.mean;
    CHECK(s.apply(at_mean).v == Point4{0, 0, 0, 0});
    FeatureVector plus_sigma;
    for (int d = 0; d < kFeatureDim; ++d) plus_sigma.v[d] = s.mean[d] + s.std[d];
    CHECK(s.apply(plus_sigma).v == Point4{1, 1, 1, 1});
}

TEST_CASE("standardize then invert recovers the input") {
    auto aggs = random_aggs(64, 6);
    auto pf = compute_period_features(aggs);
    auto s = fit_standardizer(pf.features);
    for (const auto& f : pf.features) {
        auto back = s.inverse(s.apply(f));
        for (int d = 0; d < kFeatureDim; ++d)
            CHECK(back.v[d] == doctest::Approx(f.v[d]).epsilon(1e-12));
    }
}

TEST_CASE("standardization preserves per-dimension ordering") {
    auto aggs = random_aggs(32, 8);
    auto pf = compute_period_features(aggs);
    auto s = fit_standardizer(pf.features);
    auto z = apply_standardizer(s, pf.features);
    for (int d = 0; d < kFeatureDim; ++d)
        for (std::size_t i = 1; i < z.size(); ++i)
            CHECK((pf.features[i - 1].v[d] < pf.features[i].v[d]) == (z[i - 1].v[d] < z[i].v[d]));
}
