#include "msirl/features.hpp"

#include "msirl/errors.hpp"
#include "msirl/numeric.hpp"

#include <cmath>
#include <ostream>

namespace msirl {

PeriodFeatures compute_period_features(const std::vector<PeriodAggregate>& aggregates) {
    PeriodFeatures out;
    for (std::size_t i = 1; i < aggregates.size(); ++i) {
        const auto& prev = aggregates[i - 1];
        const auto& cur = aggregates[i];
        const std::int64_t scale_ms = static_cast<std::int64_t>(cur.scale_minutes) * 60'000;
        const bool same_session = day_index(cur.period_start_ms) == day_index(prev.period_start_ms);
        const bool contiguous = cur.period_start_ms == prev.period_start_ms + scale_ms;
        if (!same_session || !contiguous) continue;

        FeatureVector f;
        f.v[0] = cur.mean_trade_price - prev.mean_trade_price;
        f.v[1] = cur.mean_spread - prev.mean_spread;
        f.v[2] = cur.total_trade_volume - prev.total_trade_volume;
        f.v[3] = cur.mean_quote_imbalance - prev.mean_quote_imbalance;
        f.period_start_ms = cur.period_start_ms;
        f.scale_minutes = cur.scale_minutes;
        out.features.push_back(f);
        out.aggregate_index.push_back(i);
    }
    if (out.features.empty())
        throw DataError("TooFewPeriods: every session chain has fewer than 2 periods");
    return out;
}

Standardizer fit_standardizer(const std::vector<FeatureVector>& features) {
    if (features.size() < 2)
        throw DataError("TooFewSamples: standardizer needs at least 2 feature vectors");
    Standardizer s;
    const double n = static_cast<double>(features.size());
    for (int d = 0; d < kFeatureDim; ++d) {
        double mu = 0.0;
        for (const auto& f : features) mu += f.v[d];
        mu /= n;
        double var = 0.0;
        for (const auto& f : features) var += (f.v[d] - mu) * (f.v[d] - mu);
        var /= n;
        s.mean[d] = mu;
        s.std[d] = std::sqrt(var);
        s.constant[d] = !(s.std[d] > 0.0);
    }
    return s;
}

FeatureVector Standardizer::apply(const FeatureVector& x) const {
    FeatureVector z = x;
    for (int d = 0; d < kFeatureDim; ++d)
        z.v[d] = constant[d] ? 0.0 : (x.v[d] - mean[d]) / std[d];
    return z;
}

FeatureVector Standardizer::inverse(const FeatureVector& z) const {
    FeatureVector x = z;
    for (int d = 0; d < kFeatureDim; ++d)
        x.v[d] = constant[d] ? mean[d] : z.v[d] * std[d] + mean[d];
    return x;
}

std::vector<FeatureVector> apply_standardizer(const Standardizer& s,
                                              const std::vector<FeatureVector>& features) {
    std::vector<FeatureVector> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(s.apply(f));
    return out;
}

void serialize_features_csv(std::ostream& out, const std::vector<FeatureVector>& features) {
    out << "period_start,scale_minutes,d_price,d_spread,d_volume,d_imbalance\n";
    for (const auto& f : features) {
        out << f.period_start_ms << ',' << f.scale_minutes;
        for (int d = 0; d < kFeatureDim; ++d) out << ',' << format_double(f.v[d]);
        out << '\n';
    }
}

} // namespace msirl
