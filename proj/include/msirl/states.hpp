#pragma once

#include "msirl/features.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace msirl {

using Point4 = std::array<double, kFeatureDim>;

// ---------------------------------------------------------------------------
// K-means core. kmeans++ seeding, Euclidean distance, best-of-restarts by
// within-cluster sum of squares. Each restart derives its own sub-seed from
// (seed, restart index), so parallel and serial execution give identical
// results; ties between restarts break toward the lower restart index.
// ---------------------------------------------------------------------------

struct KMeansResult {
    std::vector<Point4> centroids;
    std::vector<int> assignments;
    double inertia = 0.0;
    int iterations = 0;
};

KMeansResult kmeans_fit(std::span<const Point4> points, int k, std::uint64_t seed,
                        int restarts, int max_iter);

// Assignment kernel: nearest centroid per point, ties to the lowest index.
// The OpenMP version computes each point independently and is bit-identical
// to the serial reference.
void assign_nearest(std::span<const Point4> points, std::span<const Point4> centroids,
                    std::span<int> out_assignments);
double wcss(std::span<const Point4> points, std::span<const Point4> centroids,
            std::span<const int> assignments);

namespace reference {
void assign_nearest(std::span<const Point4> points, std::span<const Point4> centroids,
                    std::span<int> out_assignments);
} // namespace reference

// ---------------------------------------------------------------------------
// Temporal states. A state's signature vector is its centroid in feature
// space; online assignment is nearest-signature.
// ---------------------------------------------------------------------------

struct StateSignatureVector {
    int state_id = 0;
    Point4 centroid{};
    int member_count = 0;
    int scale_minutes = 0;
};

struct StateModel {
    int k = 0;
    int scale_minutes = 0;
    std::uint64_t seed = 0;
    int iterations = 0;
    double inertia = 0.0;
    std::vector<StateSignatureVector> signatures; // id order == lexicographic centroid order
};

struct StateFit {
    StateModel model;
    std::vector<int> assignments; // one state id per input feature vector
};

// Clusters features into K states and relabels them canonically (centroids
// sorted lexicographically) so that reports are reproducible.
StateFit cluster_states(const std::vector<FeatureVector>& features, int k, std::uint64_t seed,
                        int restarts = 8, int max_iter = 100);

int assign_state(const FeatureVector& feature, const StateModel& model);
std::vector<int> assign_states(const std::vector<FeatureVector>& features, const StateModel& model);

// |S| x 4 matrix of signature centroids; row s is the feature vector of state s.
std::vector<Point4> state_feature_matrix(const StateModel& model);

std::string state_model_to_json(const StateModel& model);
StateModel state_model_from_json(const std::string& text);

} // namespace msirl
