#pragma once

#include "msirl/maxent.hpp"
#include "msirl/states.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace msirl {

// Everything the cross-scale comparison needs from one per-scale run.
struct ScaleRunResult {
    int scale_minutes = 0;
    StateModel states;
    IrlSolution irl;
    std::vector<double> normalized_rewards; // z-scored state rewards
};

// (r - mean) / std per scale; constant input maps to the zero vector, so the
// per-scale rewards always sum to zero and are comparable across scales.
std::vector<double> normalize_rewards(const std::vector<double>& state_rewards);

struct ClusterEntry {
    int cluster_id = 0;
    Point4 centroid{};
    std::vector<std::pair<int, int>> members;   // (scale_minutes, state_id), sorted
    std::map<int, double> net_reward;           // per scale; absent scale = no members
    std::map<int, int> member_count;
};

struct CrossScaleReport {
    int cluster_count = 0;
    std::vector<int> scales;
    std::vector<ClusterEntry> clusters;
};

// Pools every scale's state signature vectors and clusters them by feature
// similarity; net rewards are filled in by aggregate_cluster_rewards.
CrossScaleReport cluster_across_scales(const std::vector<ScaleRunResult>& results,
                                       int cluster_count, std::uint64_t seed);

void aggregate_cluster_rewards(CrossScaleReport& report, const std::vector<ScaleRunResult>& results);

std::string report_to_json(const CrossScaleReport& report);
CrossScaleReport report_from_json(const std::string& text);
std::string cluster_rewards_csv(const CrossScaleReport& report);

// Per-scale figure: state signature vectors (dots) with normalized reward bars.
std::string render_scale_figure(const ScaleRunResult& result);
// Cross-scale figure: clusters positioned by centroid (spread, imbalance);
// one node per (cluster, scale) present, radius by scale rank, color mapped
// red -> green over the net-reward range.
std::string render_crossscale_figure(const CrossScaleReport& report);

// Writes report.json, cluster_rewards.csv, fig2_scale_<m>.svg per scale and
// fig3_crossscale.svg into the output directory.
void emit_report(const CrossScaleReport& report, const std::vector<ScaleRunResult>& results,
                 const std::string& out_dir);

} // namespace msirl
