#include "msirl/states.hpp"

#include "msirl/errors.hpp"
#include "msirl/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace msirl {

namespace {

double sqdist(const Point4& a, const Point4& b) {
    double s = 0.0;
    for (int d = 0; d < kFeatureDim; ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

int nearest_centroid(const Point4& p, std::span<const Point4> centroids) {
    int best = 0;
    double best_d = sqdist(p, centroids[0]);
    for (int j = 1; j < static_cast<int>(centroids.size()); ++j) {
        const double d = sqdist(p, centroids[j]);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

// kmeans++ seeding: first centroid uniform, the rest proportional to the
// squared distance to the nearest chosen centroid.
std::vector<Point4> seed_centroids(std::span<const Point4> points, int k, std::mt19937_64& rng) {
    const std::size_t n = points.size();
    std::vector<Point4> centroids;
    centroids.reserve(k);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    centroids.push_back(points[first(rng)]);

    std::vector<double> d2(n);
    for (int j = 1; j < k; ++j) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = sqdist(points[i], centroids[0]);
            for (std::size_t c = 1; c < centroids.size(); ++c)
                best = std::min(best, sqdist(points[i], centroids[c]));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double x = u(rng);
            double cum = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                cum += d2[i];
                if (x < cum) {
                    pick = i;
                    break;
                }
            }
        } else {
            // all remaining mass at distance zero; fall back to uniform
            pick = first(rng);
        }
        centroids.push_back(points[pick]);
    }
    return centroids;
}

struct LloydResult {
    std::vector<Point4> centroids;
    std::vector<int> assignments;
    double inertia = 0.0;
    int iterations = 0;
};

LloydResult lloyd(std::span<const Point4> points, int k, std::mt19937_64 rng, int max_iter) {
    const std::size_t n = points.size();
    LloydResult r;
    r.centroids = seed_centroids(points, k, rng);
    r.assignments.assign(n, -1);
    std::vector<int> prev(n, -2);

    for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
        assign_nearest(points, r.centroids, r.assignments);

        // Empty-cluster repair: reseed from the point farthest from its
        // centroid, in cluster index order.
        std::vector<int> counts(k, 0);
        for (int a : r.assignments) ++counts[a];
        for (int j = 0; j < k; ++j) {
            if (counts[j] > 0) continue;
            double worst = -1.0;
            std::size_t worst_i = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[r.assignments[i]] <= 1) continue; // keep donors non-empty
                const double d = sqdist(points[i], r.centroids[r.assignments[i]]);
                if (d > worst) {
                    worst = d;
                    worst_i = i;
                }
            }
            --counts[r.assignments[worst_i]];
            r.assignments[worst_i] = j;
            counts[j] = 1;
            r.centroids[j] = points[worst_i];
        }

        if (r.assignments == prev) break;
        prev = r.assignments;

        // Centroid update; serial accumulation keeps the result independent
        // of thread count.
        std::vector<Point4> sums(k, Point4{});
        std::vector<int> m(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (int d = 0; d < kFeatureDim; ++d) sums[r.assignments[i]][d] += points[i][d];
            ++m[r.assignments[i]];
        }
        for (int j = 0; j < k; ++j)
            for (int d = 0; d < kFeatureDim; ++d) r.centroids[j][d] = sums[j][d] / m[j];
    }

    r.inertia = wcss(points, r.centroids, r.assignments);
    return r;
}

} // namespace

void reference::assign_nearest(std::span<const Point4> points, std::span<const Point4> centroids,
                               std::span<int> out) {
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = nearest_centroid(points[i], centroids);
}

void assign_nearest(std::span<const Point4> points, std::span<const Point4> centroids,
                    std::span<int> out) {
    const std::int64_t n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[i] = nearest_centroid(points[i], centroids);
}

double wcss(std::span<const Point4> points, std::span<const Point4> centroids,
            std::span<const int> assignments) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) s += sqdist(points[i], centroids[assignments[i]]);
    return s;
}

KMeansResult kmeans_fit(std::span<const Point4> points, int k, std::uint64_t seed, int restarts,
                        int max_iter) {
    if (points.empty()) throw DataError("kmeans: no points");
    if (k < 1) throw ConfigError("kmeans: k must be >= 1");
    if (restarts < 1 || max_iter < 1) throw ConfigError("kmeans: restarts and max_iter must be >= 1");

    std::set<Point4> distinct(points.begin(), points.end());
    if (distinct.size() == 1 && k > 1)
        throw DataError("DegenerateInput: all feature vectors identical but k > 1");
    if (static_cast<std::size_t>(k) > distinct.size())
        throw DataError("KTooLarge: k = " + std::to_string(k) + " exceeds " +
                        std::to_string(distinct.size()) + " distinct points");

    std::vector<LloydResult> runs(restarts);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < restarts; ++r)
        runs[r] = lloyd(points, k, std::mt19937_64(derive_seed(seed, "kmeans-restart", r)), max_iter);

    int best = 0;
    for (int r = 1; r < restarts; ++r)
        if (runs[r].inertia < runs[best].inertia) best = r;

    KMeansResult out;
    out.centroids = std::move(runs[best].centroids);
    out.assignments = std::move(runs[best].assignments);
    out.inertia = runs[best].inertia;
    out.iterations = runs[best].iterations;
    return out;
}

StateFit cluster_states(const std::vector<FeatureVector>& features, int k, std::uint64_t seed,
                        int restarts, int max_iter) {
    std::vector<Point4> points;
    points.reserve(features.size());
    for (const auto& f : features) points.push_back(f.v);

    KMeansResult km = kmeans_fit(points, k, seed, restarts, max_iter);

    // Canonical relabeling: states ordered by centroid, lexicographically.
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return km.centroids[a] < km.centroids[b]; });
    std::vector<int> relabel(k);
    for (int new_id = 0; new_id < k; ++new_id) relabel[order[new_id]] = new_id;

    StateFit fit;
    fit.model.k = k;
    fit.model.scale_minutes = features.empty() ? 0 : features.front().scale_minutes;
    fit.model.seed = seed;
    fit.model.iterations = km.iterations;
    fit.model.inertia = km.inertia;
    fit.model.signatures.resize(k);
    std::vector<int> counts(k, 0);
    for (int a : km.assignments) ++counts[relabel[a]];
    for (int old_id = 0; old_id < k; ++old_id) {
        StateSignatureVector& s = fit.model.signatures[relabel[old_id]];
        s.state_id = relabel[old_id];
        s.centroid = km.centroids[old_id];
        s.member_count = counts[relabel[old_id]];
        s.scale_minutes = fit.model.scale_minutes;
    }
    fit.assignments.reserve(km.assignments.size());
    for (int a : km.assignments) fit.assignments.push_back(relabel[a]);
    return fit;
}

int assign_state(const FeatureVector& feature, const StateModel& model) {
    int best = 0;
    double best_d = sqdist(feature.v, model.signatures[0].centroid);
    for (int j = 1; j < model.k; ++j) {
        const double d = sqdist(feature.v, model.signatures[j].centroid);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

std::vector<int> assign_states(const std::vector<FeatureVector>& features, const StateModel& model) {
    std::vector<Point4> points;
    points.reserve(features.size());
    for (const auto& f : features) points.push_back(f.v);
    std::vector<Point4> centroids;
    centroids.reserve(model.k);
    for (const auto& s : model.signatures) centroids.push_back(s.centroid);
    std::vector<int> out(features.size());
    assign_nearest(points, centroids, out);
    return out;
}

std::vector<Point4> state_feature_matrix(const StateModel& model) {
    std::vector<Point4> m;
    m.reserve(model.k);
    for (const auto& s : model.signatures) m.push_back(s.centroid);
    return m;
}

std::string state_model_to_json(const StateModel& model) {
    nlohmann::json j;
    j["kind"] = "state_model";
    j["k"] = model.k;
    j["scale_minutes"] = model.scale_minutes;
    j["seed"] = model.seed;
    j["iterations"] = model.iterations;
    j["inertia"] = model.inertia;
    auto sigs = nlohmann::json::array();
    for (const auto& s : model.signatures) {
        nlohmann::json js;
        js["state_id"] = s.state_id;
        js["centroid"] = s.centroid;
        js["member_count"] = s.member_count;
        sigs.push_back(js);
    }
    j["signatures"] = std::move(sigs);
    return j.dump(2);
}

StateModel state_model_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    StateModel m;
    m.k = j.at("k").get<int>();
    m.scale_minutes = j.at("scale_minutes").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.iterations = j.at("iterations").get<int>();
    m.inertia = j.at("inertia").get<double>();
    for (const auto& js : j.at("signatures")) {
        StateSignatureVector s;
        s.state_id = js.at("state_id").get<int>();
        s.centroid = js.at("centroid").get<Point4>();
        s.member_count = js.at("member_count").get<int>();
        s.scale_minutes = m.scale_minutes;
        m.signatures.push_back(s);
    }
    if (static_cast<int>(m.signatures.size()) != m.k)
        throw DataError("state model JSON: signature count does not match k");
    return m;
}

} // namespace msirl
