#include "msirl/pipeline.hpp"

#include "msirl/errors.hpp"
#include "msirl/features.hpp"
#include "msirl/numeric.hpp"
#include "msirl/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace msirl {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

long ms_since(Clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

void log_stage(const char* stage, int scale, long ms) {
    std::fprintf(stderr, "[msirl] stage=%s scale=%d elapsed_ms=%ld\n", stage, scale, ms);
}

std::map<std::string, std::vector<TickRecord>> split_by_symbol(const std::vector<TickRecord>& ticks) {
    std::map<std::string, std::vector<TickRecord>> by_symbol; // ordered -> deterministic
    for (const auto& t : ticks) by_symbol[t.symbol].push_back(t);
    return by_symbol;
}

std::string checksum_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64_bytes(bytes.data(), bytes.size())));
    return buf;
}

// Config as echoed into the manifest: the output location is environment, not
// content, so equal runs into different directories stay byte-identical.
std::string canonical_config_json(const PipelineConfig& config) {
    PipelineConfig c = config;
    c.out_dir.clear();
    return c.to_json();
}

} // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in && !in.eof()) throw IoError("failed reading " + path);
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + p.parent_path().string());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("failed writing " + path);
}

// --- config -------------------------------------------------------------------

void PipelineConfig::validate() const {
    if (scales.empty()) throw ConfigError("scales must be nonempty");
    if (session.length_minutes() <= 0) throw ConfigError("session close must be after open");
    if (session.open_minute < 0 || session.close_minute > 24 * 60)
        throw ConfigError("session must lie within one UTC day");
    for (int s : scales) {
        if (s < 1) throw ConfigError("scale must be a positive number of minutes");
        if (session.length_minutes() % s != 0)
            throw ConfigError("ScaleDoesNotDivideSession: scale " + std::to_string(s) +
                              " min does not divide a " + std::to_string(session.length_minutes()) +
                              " min session");
    }
    if (states_per_scale < 1) throw ConfigError("states_per_scale must be >= 1");
    if (cluster_count < 1) throw ConfigError("cluster_count must be >= 1");
    if (epsilon < 0.0) throw ConfigError("epsilon must be >= 0");
    if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
    if (!(gamma > 0.0) || gamma > 1.0) throw ConfigError("gamma must be in (0, 1]");
    if (kmeans_restarts < 1 || kmeans_max_iter < 1)
        throw ConfigError("kmeans restarts and max_iter must be >= 1");
    if (!(solver.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (!(solver.gradient_tolerance > 0.0)) throw ConfigError("gradient_tolerance must be > 0");
    if (solver.max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
    if (out_dir.empty()) throw ConfigError("out_dir must be set");
    if (input_csv.empty()) {
        RegimeConfig syn = synthetic;
        syn.session = session;
        syn.validate();
    }
}

std::string PipelineConfig::to_json() const {
    nlohmann::json j;
    j["input_csv"] = input_csv;
    j["symbols_filter"] = symbols_filter;
    j["session"] = {{"open_minute", session.open_minute}, {"close_minute", session.close_minute}};
    j["scales"] = scales;
    j["states_per_scale"] = states_per_scale;
    j["cluster_count"] = cluster_count;
    j["epsilon"] = epsilon;
    j["alpha"] = alpha;
    j["gamma"] = gamma;
    j["action_blind_transitions"] = action_blind_transitions;
    j["use_raw_features"] = use_raw_features;
    j["kmeans_restarts"] = kmeans_restarts;
    j["kmeans_max_iter"] = kmeans_max_iter;
    j["solver"] = {{"learning_rate", solver.learning_rate},
                   {"max_iterations", solver.max_iterations},
                   {"gradient_tolerance", solver.gradient_tolerance},
                   {"horizon", solver.horizon},
                   {"theta_init", solver.theta_init},
                   {"divergence_bound", solver.divergence_bound}};
    j["seed"] = seed;
    j["pool_symbols"] = pool_symbols;
    j["write_intermediates"] = write_intermediates;
    j["out_dir"] = out_dir;
    j["synthetic"] = {{"regime_count", synthetic.regime_count},
                      {"drift", synthetic.drift},
                      {"spread_level", synthetic.spread_level},
                      {"volume_rate", synthetic.volume_rate},
                      {"imbalance_bias", synthetic.imbalance_bias},
                      {"spread_trend", synthetic.spread_trend},
                      {"volume_trend", synthetic.volume_trend},
                      {"imbalance_trend", synthetic.imbalance_trend},
                      {"level_reversion", synthetic.level_reversion},
                      {"transition", synthetic.transition},
                      {"ticks_per_minute", synthetic.ticks_per_minute},
                      {"symbols", synthetic.symbols},
                      {"start_date", synthetic.start_date},
                      {"num_sessions", synthetic.num_sessions},
                      {"base_scale_minutes", synthetic.base_scale_minutes},
                      {"start_price", synthetic.start_price},
                      {"mean_reversion", synthetic.mean_reversion},
                      {"price_noise", synthetic.price_noise},
                      {"spread_noise", synthetic.spread_noise},
                      {"volume_noise", synthetic.volume_noise},
                      {"imbalance_noise", synthetic.imbalance_noise},
                      {"quote_depth", synthetic.quote_depth}};
    return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON");
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    static const std::vector<std::string> known = {
        "input_csv", "symbols_filter", "session", "scales", "states_per_scale", "cluster_count",
        "epsilon", "alpha", "gamma", "action_blind_transitions", "use_raw_features",
        "kmeans_restarts", "kmeans_max_iter", "solver", "seed", "pool_symbols",
        "write_intermediates", "out_dir", "synthetic"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown config key: " + key);
    }

    PipelineConfig c;
    try {
        if (j.contains("input_csv")) c.input_csv = j["input_csv"].get<std::string>();
        if (j.contains("symbols_filter"))
            c.symbols_filter = j["symbols_filter"].get<std::vector<std::string>>();
        if (j.contains("session")) {
            c.session.open_minute = j["session"].at("open_minute").get<int>();
            c.session.close_minute = j["session"].at("close_minute").get<int>();
        }
        if (j.contains("scales")) c.scales = j["scales"].get<std::vector<int>>();
        if (j.contains("states_per_scale")) c.states_per_scale = j["states_per_scale"].get<int>();
        if (j.contains("cluster_count")) c.cluster_count = j["cluster_count"].get<int>();
        if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
        if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
        if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
        if (j.contains("action_blind_transitions"))
            c.action_blind_transitions = j["action_blind_transitions"].get<bool>();
        if (j.contains("use_raw_features")) c.use_raw_features = j["use_raw_features"].get<bool>();
        if (j.contains("kmeans_restarts")) c.kmeans_restarts = j["kmeans_restarts"].get<int>();
        if (j.contains("kmeans_max_iter")) c.kmeans_max_iter = j["kmeans_max_iter"].get<int>();
        if (j.contains("solver")) {
            const auto& js = j["solver"];
            if (js.contains("learning_rate")) c.solver.learning_rate = js["learning_rate"].get<double>();
            if (js.contains("max_iterations")) c.solver.max_iterations = js["max_iterations"].get<int>();
            if (js.contains("gradient_tolerance"))
                c.solver.gradient_tolerance = js["gradient_tolerance"].get<double>();
            if (js.contains("horizon")) c.solver.horizon = js["horizon"].get<int>();
            if (js.contains("theta_init")) c.solver.theta_init = js["theta_init"].get<Theta>();
            if (js.contains("divergence_bound"))
                c.solver.divergence_bound = js["divergence_bound"].get<double>();
        }
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("pool_symbols")) c.pool_symbols = j["pool_symbols"].get<bool>();
        if (j.contains("write_intermediates"))
            c.write_intermediates = j["write_intermediates"].get<bool>();
        if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
        if (j.contains("synthetic")) {
            const auto& js = j["synthetic"];
            RegimeConfig& s = c.synthetic;
            if (js.contains("regime_count")) s.regime_count = js["regime_count"].get<int>();
            if (js.contains("drift")) s.drift = js["drift"].get<std::vector<double>>();
            if (js.contains("spread_level"))
                s.spread_level = js["spread_level"].get<std::vector<double>>();
            if (js.contains("volume_rate")) s.volume_rate = js["volume_rate"].get<std::vector<double>>();
            if (js.contains("imbalance_bias"))
                s.imbalance_bias = js["imbalance_bias"].get<std::vector<double>>();
            if (js.contains("spread_trend")) s.spread_trend = js["spread_trend"].get<std::vector<double>>();
            if (js.contains("volume_trend")) s.volume_trend = js["volume_trend"].get<std::vector<double>>();
            if (js.contains("imbalance_trend"))
                s.imbalance_trend = js["imbalance_trend"].get<std::vector<double>>();
            if (js.contains("level_reversion")) s.level_reversion = js["level_reversion"].get<double>();
            if (js.contains("transition"))
                s.transition = js["transition"].get<std::vector<std::vector<double>>>();
            if (js.contains("ticks_per_minute")) s.ticks_per_minute = js["ticks_per_minute"].get<double>();
            if (js.contains("symbols")) s.symbols = js["symbols"].get<std::vector<std::string>>();
            if (js.contains("start_date")) s.start_date = js["start_date"].get<std::string>();
            if (js.contains("num_sessions")) s.num_sessions = js["num_sessions"].get<int>();
            if (js.contains("base_scale_minutes"))
                s.base_scale_minutes = js["base_scale_minutes"].get<int>();
            if (js.contains("start_price")) s.start_price = js["start_price"].get<double>();
            if (js.contains("mean_reversion")) s.mean_reversion = js["mean_reversion"].get<double>();
            if (js.contains("price_noise")) s.price_noise = js["price_noise"].get<double>();
            if (js.contains("spread_noise")) s.spread_noise = js["spread_noise"].get<double>();
            if (js.contains("volume_noise")) s.volume_noise = js["volume_noise"].get<double>();
            if (js.contains("imbalance_noise")) s.imbalance_noise = js["imbalance_noise"].get<double>();
            if (js.contains("quote_depth")) s.quote_depth = js["quote_depth"].get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return c;
}

// --- per-scale pipeline --------------------------------------------------------

ScaleArtifacts run_scale(const std::vector<TickRecord>& ticks, int scale_minutes,
                         const PipelineConfig& config) {
    auto t0 = Clock::now();
    auto by_symbol = split_by_symbol(ticks);

    // Resample and difference per symbol, then pool per scale.
    std::vector<FeatureVector> pooled;
    struct SymbolChunk {
        std::string symbol;
        std::vector<PeriodAggregate> aggregates;
        std::vector<PeriodAggregate> feature_aggs; // aggregates that carry a feature
        std::size_t offset = 0;                    // position in the pooled feature list
    };
    std::vector<SymbolChunk> chunks;
    for (const auto& [symbol, sym_ticks] : by_symbol) {
        auto aggs = resample(sym_ticks, scale_minutes, config.session);
        auto pf = compute_period_features(aggs);
        SymbolChunk chunk;
        chunk.symbol = symbol;
        chunk.offset = pooled.size();
        chunk.feature_aggs.reserve(pf.features.size());
        for (std::size_t i = 0; i < pf.features.size(); ++i) {
            pooled.push_back(pf.features[i]);
            chunk.feature_aggs.push_back(aggs[pf.aggregate_index[i]]);
        }
        chunk.aggregates = std::move(aggs);
        chunks.push_back(std::move(chunk));
    }

    Standardizer standardizer = fit_standardizer(pooled);
    const std::vector<FeatureVector> feats =
        config.use_raw_features ? pooled : apply_standardizer(standardizer, pooled);
    log_stage("features", scale_minutes, ms_since(t0));

    t0 = Clock::now();
    StateFit sf = cluster_states(feats, config.states_per_scale,
                                 derive_seed(config.seed, "states", scale_minutes),
                                 config.kmeans_restarts, config.kmeans_max_iter);
    log_stage("states", scale_minutes, ms_since(t0));

    t0 = Clock::now();
    std::vector<Trajectory> trajectories;
    for (const auto& chunk : chunks) {
        std::vector<int> assignments(sf.assignments.begin() + chunk.offset,
                                     sf.assignments.begin() + chunk.offset + chunk.feature_aggs.size());
        auto trajs = build_trajectories(assignments, chunk.feature_aggs, config.epsilon);
        for (auto& t : trajs) trajectories.push_back(std::move(t));
    }

    // The solver wants equal-length episodes; keep the dominant session length
    // (ties toward the longer one) and report the rest as dropped.
    std::map<std::size_t, int> by_len;
    for (const auto& t : trajectories) by_len[t.steps.size()] += 1;
    std::size_t keep_len = 0;
    int keep_count = -1;
    for (const auto& [len, count] : by_len)
        if (count > keep_count || (count == keep_count && len > keep_len)) {
            keep_len = len;
            keep_count = count;
        }
    ScaleArtifacts art;
    for (auto& t : trajectories) {
        if (t.steps.size() == keep_len)
            art.trajectories.push_back(std::move(t));
        else
            ++art.dropped_trajectories;
    }
    if (art.dropped_trajectories > 0)
        std::fprintf(stderr, "[msirl] scale=%d dropped %d off-length trajectories (keep length %zu)\n",
                     scale_minutes, art.dropped_trajectories, keep_len);
    log_stage("trajectories", scale_minutes, ms_since(t0));

    t0 = Clock::now();
    TransitionModel trans = estimate_transitions(art.trajectories, sf.model.k, config.alpha,
                                                 config.action_blind_transitions);
    std::vector<double> start = estimate_start_distribution(art.trajectories, sf.model.k);
    art.mdp = assemble_mdp(sf.model, std::move(trans), std::move(start), config.gamma);
    log_stage("mdp", scale_minutes, ms_since(t0));

    t0 = Clock::now();
    IrlSolution irl = fit(art.mdp, art.trajectories, config.solver);
    std::fprintf(stderr,
                 "[msirl] scale=%d irl %s after %d iterations, |grad|=%.3g, log-likelihood %.6g\n",
                 scale_minutes, irl.converged ? "converged" : "stopped", irl.iterations_used,
                 irl.gradient_norm_trace.empty() ? 0.0 : irl.gradient_norm_trace.back(),
                 irl.likelihood_trace.empty() ? 0.0 : irl.likelihood_trace.back());
    log_stage("irl", scale_minutes, ms_since(t0));

    art.result.scale_minutes = scale_minutes;
    art.result.states = std::move(sf.model);
    art.result.normalized_rewards = normalize_rewards(irl.state_rewards);
    art.result.irl = std::move(irl);

    // inspection exports live alongside the fitted artifacts
    std::ostringstream feats_csv;
    serialize_features_csv(feats_csv, feats);
    art.features_csv = feats_csv.str();
    for (const auto& chunk : chunks) {
        std::ostringstream aggs_csv;
        serialize_aggregates_csv(aggs_csv, chunk.aggregates);
        art.aggregates_csv.emplace_back(chunk.symbol, aggs_csv.str());
    }
    return art;
}

// --- commands -------------------------------------------------------------------

GenerateOutputs cmd_generate(const PipelineConfig& config) {
    config.validate();
    if (!config.input_csv.empty())
        throw ConfigError("generate needs a synthetic input configuration");
    RegimeConfig syn = config.synthetic;
    syn.session = config.session;
    syn.seed = derive_seed(config.seed, "synthetic");

    auto t0 = Clock::now();
    SyntheticTicks data = generate_synthetic_ticks(syn);

    GenerateOutputs out;
    out.ticks_path = (fs::path(config.out_dir) / "ticks.csv").string();
    out.labels_path = (fs::path(config.out_dir) / "ticks_labels.csv").string();
    out.tick_count = data.ticks.size();
    write_file(out.ticks_path, serialize_tick_csv(data.ticks));
    std::ostringstream labels;
    serialize_labels_csv(labels, data.labels);
    write_file(out.labels_path, labels.str());

    std::map<int, int> regime_periods;
    for (const auto& l : data.labels) regime_periods[l.regime] += 1;
    std::fprintf(stderr, "[msirl] generated %zu ticks over %d sessions (%zu base periods)\n",
                 data.ticks.size(), syn.num_sessions, data.labels.size());
    for (const auto& [regime, count] : regime_periods)
        std::fprintf(stderr, "[msirl]   regime %d: %d periods\n", regime, count);
    log_stage("generate", syn.base_scale_minutes, ms_since(t0));
    return out;
}

RunOutputs cmd_run(const PipelineConfig& config) {
    config.validate();

    // Independent per-symbol runs when pooling is disabled.
    if (!config.pool_symbols) {
        std::vector<std::string> symbols = config.symbols_filter;
        if (symbols.empty()) {
            if (!config.input_csv.empty()) {
                auto ticks = parse_tick_csv(read_file(config.input_csv));
                for (const auto& [sym, v] : split_by_symbol(ticks)) {
                    (void)v;
                    symbols.push_back(sym);
                }
            } else {
                symbols = config.synthetic.symbols;
                std::sort(symbols.begin(), symbols.end());
            }
        }
        RunOutputs last;
        nlohmann::json all_files = nlohmann::json::object();
        for (const auto& sym : symbols) {
            PipelineConfig sub = config;
            sub.pool_symbols = true;
            sub.symbols_filter = {sym};
            sub.out_dir = (fs::path(config.out_dir) / sym).string();
            last = cmd_run(sub);
            all_files[sym] = nlohmann::json::parse(last.manifest_json).at("artifacts");
        }
        nlohmann::json top;
        top["kind"] = "run_manifest";
        top["seed"] = config.seed;
        top["config_hash"] = checksum_hex(canonical_config_json(config));
        top["per_symbol_artifacts"] = std::move(all_files);
        last.manifest_json = top.dump(2);
        write_file((fs::path(config.out_dir) / "manifest.json").string(), last.manifest_json);
        return last;
    }

    auto t0 = Clock::now();
    std::vector<TickRecord> ticks;
    if (!config.input_csv.empty()) {
        ticks = parse_tick_csv(read_file(config.input_csv));
    } else {
        RegimeConfig syn = config.synthetic;
        syn.session = config.session;
        syn.seed = derive_seed(config.seed, "synthetic");
        ticks = generate_synthetic_ticks(syn).ticks;
    }
    if (!config.symbols_filter.empty()) {
        std::erase_if(ticks, [&](const TickRecord& t) {
            return std::find(config.symbols_filter.begin(), config.symbols_filter.end(), t.symbol) ==
                   config.symbols_filter.end();
        });
    }
    if (ticks.empty()) throw DataError("EmptyInput: no ticks after the symbol filter");
    log_stage("input", 0, ms_since(t0));

    RunOutputs out;
    out.per_scale.resize(config.scales.size());
    std::vector<std::string> errors(config.scales.size());
    std::vector<int> error_codes(config.scales.size(), 0);

    // Scales are independent after resampling; run them in parallel.
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < config.scales.size(); ++i) {
        try {
            out.per_scale[i] = run_scale(ticks, config.scales[i], config);
        } catch (const Error& e) {
            errors[i] = std::string("scale ") + std::to_string(config.scales[i]) + ": " + e.what();
            error_codes[i] = e.exit_code();
        } catch (const std::exception& e) {
            errors[i] = std::string("scale ") + std::to_string(config.scales[i]) + ": " + e.what();
            error_codes[i] = 3;
        }
    }
    for (std::size_t i = 0; i < config.scales.size(); ++i)
        if (!errors[i].empty()) throw Error(errors[i], error_codes[i]);

    std::map<std::string, std::string> artifacts; // name -> content
    if (config.write_intermediates) {
        for (const auto& art : out.per_scale) {
            const std::string m = std::to_string(art.result.scale_minutes);
            artifacts["state_model_" + m + ".json"] = state_model_to_json(art.result.states);
            std::ostringstream trajs;
            serialize_trajectories_jsonl(trajs, art.trajectories);
            artifacts["trajectories_" + m + ".jsonl"] = trajs.str();
            artifacts["mdp_" + m + ".json"] = mdp_to_json(art.mdp);
            artifacts["irl_" + m + ".json"] = irl_solution_to_json(art.result.irl);
            artifacts["features_" + m + ".csv"] = art.features_csv;
            for (const auto& [symbol, csv] : art.aggregates_csv)
                artifacts["aggregates_" + m + "_" + symbol + ".csv"] = csv;
        }
    }

    t0 = Clock::now();
    std::vector<ScaleRunResult> results;
    for (const auto& art : out.per_scale) results.push_back(art.result);
    out.report = cluster_across_scales(results, config.cluster_count,
                                       derive_seed(config.seed, "crossscale"));
    aggregate_cluster_rewards(out.report, results);
    artifacts["report.json"] = report_to_json(out.report);
    artifacts["cluster_rewards.csv"] = cluster_rewards_csv(out.report);
    for (const auto& r : results)
        artifacts["fig2_scale_" + std::to_string(r.scale_minutes) + ".svg"] = render_scale_figure(r);
    artifacts["fig3_crossscale.svg"] = render_crossscale_figure(out.report);
    log_stage("crossscale", 0, ms_since(t0));

    nlohmann::json manifest;
    manifest["kind"] = "run_manifest";
    manifest["seed"] = config.seed;
    manifest["config_hash"] = checksum_hex(canonical_config_json(config));
    manifest["config"] = nlohmann::json::parse(canonical_config_json(config));
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [name, content] : artifacts) files[name] = checksum_hex(content);
    manifest["artifacts"] = std::move(files);
    out.manifest_json = manifest.dump(2);

    for (const auto& [name, content] : artifacts)
        write_file((fs::path(config.out_dir) / name).string(), content);
    write_file((fs::path(config.out_dir) / "manifest.json").string(), out.manifest_json);
    return out;
}

IrlSolution cmd_irl(const std::string& mdp_path, const std::string& trajectories_path,
                    const SolverConfig& solver, const std::string& out_path) {
    MdpModel mdp = mdp_from_json(read_file(mdp_path));
    std::istringstream trajs_in(read_file(trajectories_path));
    std::vector<Trajectory> trajectories = parse_trajectories_jsonl(trajs_in);
    IrlSolution sol = fit(mdp, trajectories, solver);
    if (!out_path.empty()) write_file(out_path, irl_solution_to_json(sol));
    return sol;
}

CrossScaleReport cmd_report(const std::string& artifacts_dir, const std::vector<int>& scales,
                            int cluster_count, std::uint64_t seed) {
    std::vector<ScaleRunResult> results;
    for (int scale : scales) {
        const std::string m = std::to_string(scale);
        ScaleRunResult r;
        r.scale_minutes = scale;
        r.states = state_model_from_json(
            read_file((fs::path(artifacts_dir) / ("state_model_" + m + ".json")).string()));
        r.irl = irl_solution_from_json(
            read_file((fs::path(artifacts_dir) / ("irl_" + m + ".json")).string()));
        r.normalized_rewards = normalize_rewards(r.irl.state_rewards);
        results.push_back(std::move(r));
    }
    CrossScaleReport report =
        cluster_across_scales(results, cluster_count, derive_seed(seed, "crossscale"));
    aggregate_cluster_rewards(report, results);
    emit_report(report, results, artifacts_dir);
    return report;
}

// --- gradient check --------------------------------------------------------------

double gradient_check_max_error() {
    // Bundled regression MDP: 5 states, 3 actions, fixed seed.
    const int ns = 5, na = 3, horizon = 6;
    auto rng = make_rng(9001, "gradient-check");
    std::uniform_real_distribution<double> u(0.0, 1.0);

    TransitionModel trans;
    trans.num_states = ns;
    trans.num_actions = na;
    trans.alpha = 0.0;
    trans.counts.assign(static_cast<std::size_t>(ns) * na * ns, 0.0);
    trans.probs.resize(trans.counts.size());
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < na; ++a) {
            double row_sum = 0.0;
            for (int s2 = 0; s2 < ns; ++s2) {
                const double w = 0.05 + u(rng);
                trans.probs[(s * na + a) * ns + s2] = w;
                row_sum += w;
            }
            for (int s2 = 0; s2 < ns; ++s2) trans.probs[(s * na + a) * ns + s2] /= row_sum;
        }

    std::vector<Point4> features(ns);
    for (auto& f : features)
        for (int d = 0; d < kFeatureDim; ++d) f[d] = 2.0 * u(rng) - 1.0;

    std::vector<double> start(ns, 1.0 / ns);
    MdpModel mdp = assemble_mdp(features, std::move(trans), std::move(start));

    const Theta theta = {0.4, -0.3, 0.2, 0.1};
    auto paths = sample_paths(mdp, backward_pass(mdp, theta, horizon), 1, 4242);

    // Single trajectory: condition the start distribution on its first state
    // so the analytic gradient and the likelihood share one normalization.
    std::vector<double> point_start(ns, 0.0);
    point_start[paths.front().steps.front().state] = 1.0;
    mdp.start_distribution = point_start;

    FeatureExpectations fe = empirical_feature_expectations(paths, mdp.feature_matrix);
    MaxEntPolicy pol = backward_pass(mdp, theta, horizon);
    Visitation vis = forward_pass(mdp, pol);
    Theta analytic = gradient(fe.f_tilde, vis.total, mdp.feature_matrix);

    const double h = 1e-5;
    double max_rel = 0.0;
    for (int d = 0; d < kFeatureDim; ++d) {
        Theta tp = theta, tm = theta;
        tp[d] += h;
        tm[d] -= h;
        const double fd =
            (log_likelihood(paths, tp, mdp, horizon) - log_likelihood(paths, tm, mdp, horizon)) /
            (2.0 * h);
        const double rel = std::abs(fd - analytic[d]) / std::max({std::abs(fd), std::abs(analytic[d]), 1e-3});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

} // namespace msirl
