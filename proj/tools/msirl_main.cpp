// msirl: multi-scale market reward estimation pipeline.
//
// Subcommands:
//   generate  write a synthetic tick CSV plus a planted-regime sidecar
//   run       full pipeline: resample -> features -> states -> trajectories
//             -> MDP -> IRL per scale, then the cross-scale report
//   irl       fit the reward model alone, on persisted artifacts
//   report    cross-scale stage alone, on persisted per-scale artifacts
//
// Exit codes: 0 success, 2 config error, 3 data/io error, 4 solver error.

#include "msirl/errors.hpp"
#include "msirl/numeric.hpp"
#include "msirl/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace {

struct CommonFlags {
    std::string config_path;
    bool has_seed = false;
    std::uint64_t seed = 0;
    std::vector<int> scales;
    int states_per_scale = 0;
    int clusters = 0;
    double epsilon = -1.0;
    double alpha = -1.0;
    std::string out_dir;
    std::string input_csv;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file; flags override its values");
    cmd->add_option("--seed", f.seed, "root RNG seed")->each([&](const std::string&) {
        f.has_seed = true;
    });
    cmd->add_option("--scales", f.scales, "calendar scales in minutes")->delimiter(',');
    cmd->add_option("--states-per-scale", f.states_per_scale, "K for per-scale state detection");
    cmd->add_option("--clusters", f.clusters, "cross-scale cluster count");
    cmd->add_option("--epsilon", f.epsilon, "action dead-band on price returns");
    cmd->add_option("--alpha", f.alpha, "transition smoothing");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--input", f.input_csv, "tick CSV input (omit to use the synthetic generator)");
}

msirl::PipelineConfig build_config(const CommonFlags& f) {
    msirl::PipelineConfig config;
    if (!f.config_path.empty())
        config = msirl::PipelineConfig::from_json(msirl::read_file(f.config_path));
    if (f.has_seed) config.seed = f.seed;
    if (!f.scales.empty()) config.scales = f.scales;
    if (f.states_per_scale > 0) config.states_per_scale = f.states_per_scale;
    if (f.clusters > 0) config.cluster_count = f.clusters;
    if (f.epsilon >= 0.0) config.epsilon = f.epsilon;
    if (f.alpha >= 0.0) config.alpha = f.alpha;
    if (!f.out_dir.empty()) config.out_dir = f.out_dir;
    if (!f.input_csv.empty()) config.input_csv = f.input_csv;
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-scale market reward estimation"};
    app.require_subcommand(1);

    CommonFlags gen_flags, run_flags;
    auto* cmd_gen = app.add_subcommand("generate", "write synthetic ticks and planted labels");
    add_common(cmd_gen, gen_flags);

    auto* cmd_run = app.add_subcommand("run", "run the full pipeline");
    add_common(cmd_run, run_flags);
    bool no_intermediates = false;
    cmd_run->add_flag("--no-intermediates", no_intermediates,
                      "skip persisting per-scale artifacts");

    auto* cmd_irl = app.add_subcommand("irl", "fit the reward model on persisted artifacts");
    std::string irl_mdp, irl_trajs, irl_out = "irl.json";
    msirl::SolverConfig solver;
    bool gradient_check = false;
    cmd_irl->add_option("--mdp", irl_mdp, "mdp_<scale>.json path");
    cmd_irl->add_option("--trajectories", irl_trajs, "trajectories_<scale>.jsonl path");
    cmd_irl->add_option("--out", irl_out, "output path for the solution JSON");
    cmd_irl->add_option("--learning-rate", solver.learning_rate, "gradient ascent step");
    cmd_irl->add_option("--max-iterations", solver.max_iterations, "iteration cap");
    cmd_irl->add_option("--tolerance", solver.gradient_tolerance, "stop when |grad|_inf drops below");
    cmd_irl->add_option("--horizon", solver.horizon, "override horizon (0: trajectory length)");
    cmd_irl->add_flag("--gradient-check", gradient_check,
                      "print the analytic-vs-finite-difference error on the bundled MDP and exit");

    auto* cmd_report = app.add_subcommand("report", "cross-scale report from persisted artifacts");
    CommonFlags report_flags;
    add_common(cmd_report, report_flags);
    std::string report_dir;
    cmd_report->add_option("--artifacts", report_dir, "directory with per-scale artifacts")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (cmd_gen->parsed()) {
            auto out = msirl::cmd_generate(build_config(gen_flags));
            std::printf("ticks: %s\nlabels: %s\nrows: %zu\n", out.ticks_path.c_str(),
                        out.labels_path.c_str(), out.tick_count);
        } else if (cmd_run->parsed()) {
            auto config = build_config(run_flags);
            if (no_intermediates) config.write_intermediates = false;
            auto out = msirl::cmd_run(config);
            std::printf("wrote %s/manifest.json\n", config.out_dir.c_str());
        } else if (cmd_irl->parsed()) {
            if (gradient_check) {
                const double err = msirl::gradient_check_max_error();
                std::printf("gradient check: max relative error %s\n",
                            msirl::format_double(err).c_str());
                return err < 1e-5 ? 0 : 4;
            }
            if (irl_mdp.empty() || irl_trajs.empty())
                throw msirl::ConfigError("irl needs --mdp and --trajectories (or --gradient-check)");
            auto sol = msirl::cmd_irl(irl_mdp, irl_trajs, solver, irl_out);
            std::printf("theta: [%s, %s, %s, %s]\nconverged: %s after %d iterations\nwrote %s\n",
                        msirl::format_double(sol.theta[0]).c_str(),
                        msirl::format_double(sol.theta[1]).c_str(),
                        msirl::format_double(sol.theta[2]).c_str(),
                        msirl::format_double(sol.theta[3]).c_str(), sol.converged ? "yes" : "no",
                        sol.iterations_used, irl_out.c_str());
        } else if (cmd_report->parsed()) {
            auto config = build_config(report_flags);
            auto report = msirl::cmd_report(report_dir, config.scales, config.cluster_count,
                                            config.seed);
            std::printf("wrote cross-scale report with %d clusters to %s\n", report.cluster_count,
                        report_dir.c_str());
        }
    } catch (const msirl::Error& e) {
        std::fprintf(stderr, "msirl: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "msirl: %s\n", e.what());
        return 3;
    }
    return 0;
}
