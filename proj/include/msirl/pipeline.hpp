#pragma once

#include "msirl/crossscale.hpp"
#include "msirl/maxent.hpp"
#include "msirl/ticks.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace msirl {

// Full-pipeline configuration. Loadable from a JSON document; CLI flags
// override file values. `gamma` is carried into every MdpModel but the
// finite-horizon solver does not consume it.
struct PipelineConfig {
    // input: either a tick CSV or the synthetic generator
    std::string input_csv;           // empty -> synthetic
    RegimeConfig synthetic = RegimeConfig::three_regime_default(42);
    std::vector<std::string> symbols_filter; // empty -> all symbols

    SessionHours session;
    std::vector<int> scales = {5, 15, 30, 60};
    int states_per_scale = 8;
    int cluster_count = 6;
    double epsilon = 0.0;    // action dead-band
    double alpha = 0.05;     // transition smoothing
    double gamma = 1.0;
    bool action_blind_transitions = false;
    bool use_raw_features = false; // IRL features: raw changes instead of z-scores
    int kmeans_restarts = 8;
    int kmeans_max_iter = 100;
    SolverConfig solver;
    std::uint64_t seed = 42;
    bool pool_symbols = true;  // false: independent run per symbol, under out/<symbol>/
    bool write_intermediates = true;
    std::string out_dir = "out";

    void validate() const;
    std::string to_json() const;
    static PipelineConfig from_json(const std::string& text);
};

// One scale's fitted artifacts plus what the cross-scale stage consumes.
struct ScaleArtifacts {
    ScaleRunResult result;
    std::vector<Trajectory> trajectories;
    MdpModel mdp;
    int dropped_trajectories = 0; // off-length episodes excluded from the fit
    std::string features_csv;     // feature matrix as fed to clustering
    std::vector<std::pair<std::string, std::string>> aggregates_csv; // per symbol
};

// Per-scale stage chain: resample -> features -> states -> trajectories ->
// MDP -> IRL. `ticks` may hold several symbols; they are split, resampled
// per symbol and pooled per scale.
ScaleArtifacts run_scale(const std::vector<TickRecord>& ticks, int scale_minutes,
                         const PipelineConfig& config);

struct RunOutputs {
    std::vector<ScaleArtifacts> per_scale;
    CrossScaleReport report;
    std::string manifest_json;
};

// generate: synthetic ticks + planted-label sidecar, written under out_dir.
struct GenerateOutputs {
    std::string ticks_path;
    std::string labels_path;
    std::size_t tick_count = 0;
};
GenerateOutputs cmd_generate(const PipelineConfig& config);

// run: the full per-scale pipeline plus the cross-scale report and manifest.
RunOutputs cmd_run(const PipelineConfig& config);

// irl: fit alone, on persisted artifacts.
IrlSolution cmd_irl(const std::string& mdp_path, const std::string& trajectories_path,
                    const SolverConfig& solver, const std::string& out_path);

// report: cross-scale stage alone, on persisted per-scale artifacts under dir.
CrossScaleReport cmd_report(const std::string& artifacts_dir, const std::vector<int>& scales,
                            int cluster_count, std::uint64_t seed);

// Gradient check on a small fixed MDP: max relative error between the
// analytic gradient and central finite differences of the log-likelihood.
double gradient_check_max_error();

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace msirl
