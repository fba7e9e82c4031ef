#pragma once

#include "msirl/ticks.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace msirl {

inline constexpr int kFeatureDim = 4;
inline constexpr std::array<const char*, kFeatureDim> kFeatureNames = {
    "d_price", "d_spread", "d_volume", "d_imbalance"};

// Per-period change vector: first differences of (mean trade price, mean
// spread, total trade volume, mean quote imbalance), in that fixed order.
struct FeatureVector {
    std::array<double, kFeatureDim> v{};
    std::int64_t period_start_ms = 0;
    int scale_minutes = 0;

    double d_price() const { return v[0]; }
    double d_spread() const { return v[1]; }
    double d_volume() const { return v[2]; }
    double d_imbalance() const { return v[3]; }
};

struct PeriodFeatures {
    std::vector<FeatureVector> features;
    // features[i] describes aggregates[aggregate_index[i]]; chain heads
    // (session starts and post-gap periods) have no feature.
    std::vector<std::size_t> aggregate_index;
};

// Raw first differences along contiguous same-session period chains. Throws
// TooFewPeriods (DataError) when no chain has at least two periods.
PeriodFeatures compute_period_features(const std::vector<PeriodAggregate>& aggregates);

// Per-dimension z-scoring fitted on an in-sample window. Constant dimensions
// are flagged and map to 0 instead of dividing by zero.
struct Standardizer {
    std::array<double, kFeatureDim> mean{};
    std::array<double, kFeatureDim> std{};
    std::array<bool, kFeatureDim> constant{};

    FeatureVector apply(const FeatureVector& x) const;
    FeatureVector inverse(const FeatureVector& z) const;
};

Standardizer fit_standardizer(const std::vector<FeatureVector>& features);

std::vector<FeatureVector> apply_standardizer(const Standardizer& s,
                                              const std::vector<FeatureVector>& features);

void serialize_features_csv(std::ostream& out, const std::vector<FeatureVector>& features);

} // namespace msirl
