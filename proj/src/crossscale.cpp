#include "msirl/crossscale.hpp"

#include "msirl/errors.hpp"
#include "msirl/numeric.hpp"
#include "msirl/svg.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace msirl {

namespace {

constexpr unsigned kRed = 0xd64545;
constexpr unsigned kGreen = 0x2ca05a;

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw IoError("failed writing " + path.string());
}

} // namespace

std::vector<double> normalize_rewards(const std::vector<double>& state_rewards) {
    if (state_rewards.empty()) throw DataError("normalize_rewards: empty reward vector");
    const double mu = mean(state_rewards);
    const double sd = stddev_pop(state_rewards);
    std::vector<double> out(state_rewards.size(), 0.0);
    if (sd > 0.0)
        for (std::size_t i = 0; i < state_rewards.size(); ++i) out[i] = (state_rewards[i] - mu) / sd;
    return out;
}

CrossScaleReport cluster_across_scales(const std::vector<ScaleRunResult>& results,
                                       int cluster_count, std::uint64_t seed) {
    std::vector<Point4> pooled;
    std::vector<std::pair<int, int>> origin; // (scale, state_id)
    for (const auto& r : results)
        for (const auto& sig : r.states.signatures) {
            pooled.push_back(sig.centroid);
            origin.emplace_back(r.scale_minutes, sig.state_id);
        }
    if (static_cast<int>(pooled.size()) < cluster_count)
        throw DataError("TooFewStates: " + std::to_string(pooled.size()) + " pooled states for " +
                        std::to_string(cluster_count) + " clusters");

    KMeansResult km = kmeans_fit(pooled, cluster_count, seed, 8, 100);

    // Canonical cluster ids: lexicographic centroid order.
    std::vector<int> order(cluster_count);
    for (int i = 0; i < cluster_count; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return km.centroids[a] < km.centroids[b]; });
    std::vector<int> relabel(cluster_count);
    for (int new_id = 0; new_id < cluster_count; ++new_id) relabel[order[new_id]] = new_id;

    CrossScaleReport report;
    report.cluster_count = cluster_count;
    for (const auto& r : results) report.scales.push_back(r.scale_minutes);
    std::sort(report.scales.begin(), report.scales.end());
    report.clusters.resize(cluster_count);
    for (int c = 0; c < cluster_count; ++c) {
        report.clusters[c].cluster_id = c;
        report.clusters[c].centroid = km.centroids[order[c]];
    }
    for (std::size_t i = 0; i < pooled.size(); ++i)
        report.clusters[relabel[km.assignments[i]]].members.push_back(origin[i]);
    for (auto& cl : report.clusters) std::sort(cl.members.begin(), cl.members.end());
    return report;
}

void aggregate_cluster_rewards(CrossScaleReport& report, const std::vector<ScaleRunResult>& results) {
    std::map<int, const ScaleRunResult*> by_scale;
    for (const auto& r : results) by_scale[r.scale_minutes] = &r;

    for (auto& cl : report.clusters) {
        cl.net_reward.clear();
        cl.member_count.clear();
        for (const auto& [scale, state_id] : cl.members) {
            auto it = by_scale.find(scale);
            if (it == by_scale.end())
                throw DataError("MissingReward: no run result for scale " + std::to_string(scale));
            const auto& rewards = it->second->normalized_rewards;
            if (state_id < 0 || state_id >= static_cast<int>(rewards.size()))
                throw DataError("MissingReward: state " + std::to_string(state_id) +
                                " has no normalized reward at scale " + std::to_string(scale));
            cl.net_reward[scale] += rewards[state_id];
            cl.member_count[scale] += 1;
        }
    }
}

// --- serialization ----------------------------------------------------------

std::string report_to_json(const CrossScaleReport& report) {
    nlohmann::json j;
    j["kind"] = "crossscale_report";
    j["cluster_count"] = report.cluster_count;
    j["scales"] = report.scales;
    auto clusters = nlohmann::json::array();
    for (const auto& cl : report.clusters) {
        nlohmann::json jc;
        jc["cluster_id"] = cl.cluster_id;
        jc["centroid"] = cl.centroid;
        // Figure positioning: (spread, imbalance) components of the centroid.
        jc["position"] = {cl.centroid[1], cl.centroid[3]};
        auto members = nlohmann::json::array();
        for (const auto& [scale, state] : cl.members)
            members.push_back({{"scale_minutes", scale}, {"state_id", state}});
        jc["members"] = std::move(members);
        nlohmann::json jr = nlohmann::json::object();
        for (const auto& [scale, reward] : cl.net_reward) jr[std::to_string(scale)] = reward;
        jc["net_reward"] = std::move(jr);
        nlohmann::json jm = nlohmann::json::object();
        for (const auto& [scale, count] : cl.member_count) jm[std::to_string(scale)] = count;
        jc["member_count"] = std::move(jm);
        clusters.push_back(std::move(jc));
    }
    j["clusters"] = std::move(clusters);
    return j.dump(2);
}

CrossScaleReport report_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    CrossScaleReport report;
    report.cluster_count = j.at("cluster_count").get<int>();
    report.scales = j.at("scales").get<std::vector<int>>();
    for (const auto& jc : j.at("clusters")) {
        ClusterEntry cl;
        cl.cluster_id = jc.at("cluster_id").get<int>();
        cl.centroid = jc.at("centroid").get<Point4>();
        for (const auto& jm : jc.at("members"))
            cl.members.emplace_back(jm.at("scale_minutes").get<int>(), jm.at("state_id").get<int>());
        for (const auto& [key, value] : jc.at("net_reward").items())
            cl.net_reward[std::stoi(key)] = value.get<double>();
        for (const auto& [key, value] : jc.at("member_count").items())
            cl.member_count[std::stoi(key)] = value.get<int>();
        report.clusters.push_back(std::move(cl));
    }
    return report;
}

std::string cluster_rewards_csv(const CrossScaleReport& report) {
    std::ostringstream out;
    out << "cluster_id,scale_minutes,net_reward,member_count\n";
    for (const auto& cl : report.clusters)
        for (const auto& [scale, reward] : cl.net_reward)
            out << cl.cluster_id << ',' << scale << ',' << format_double(reward) << ','
                << cl.member_count.at(scale) << '\n';
    return out.str();
}

// --- figures ------------------------------------------------------------------

std::string render_scale_figure(const ScaleRunResult& result) {
    const int k = result.states.k;
    const double panel_w = 96.0;
    const double width = 70.0 + panel_w * k + 30.0;
    const double height = 330.0;
    const double mid_y = 170.0; // zero line for feature dots
    const double reward_y0 = 300.0;
    SvgWriter svg(width, height);

    svg.text(20, 24, "states at " + std::to_string(result.scale_minutes) + " min", 14.0);
    svg.text(20, 42, "dots: signature vector (z-scored changes); bars: normalized reward", 10.0,
             "start", "#666666");

    double fmax = 1e-9;
    for (const auto& sig : result.states.signatures)
        for (double x : sig.centroid) fmax = std::max(fmax, std::abs(x));
    double rmax = 1e-9;
    for (double r : result.normalized_rewards) rmax = std::max(rmax, std::abs(r));

    const std::array<std::string, kFeatureDim> dim_colors = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                                             "#9467bd"};
    svg.line(60, mid_y, width - 20, mid_y, "#bbbbbb");
    for (int s = 0; s < k; ++s) {
        const auto& sig = result.states.signatures[s];
        const double x0 = 70.0 + panel_w * s;
        if (s > 0) svg.line(x0 - 10, 60, x0 - 10, height - 10, "#eeeeee");
        svg.text(x0 + panel_w / 2 - 10, 60, "s" + std::to_string(s), 11.0, "middle");
        for (int d = 0; d < kFeatureDim; ++d) {
            const double cx = x0 + 12.0 + 18.0 * d;
            const double cy = mid_y - sig.centroid[d] / fmax * 90.0;
            svg.circle(cx, cy, 3.5, dim_colors[d], "feature-dot");
        }
        const double r = result.normalized_rewards[s];
        const double bar_h = std::abs(r) / rmax * 40.0;
        const double y = r >= 0.0 ? reward_y0 - bar_h : reward_y0;
        svg.rect(x0 + 12.0, y, 54.0, bar_h, r >= 0.0 ? "#2ca05a" : "#d64545");
    }
    svg.line(60, reward_y0, width - 20, reward_y0, "#bbbbbb");
    for (int d = 0; d < kFeatureDim; ++d) {
        svg.rect(70.0 + 110.0 * d, height - 18, 10, 10, dim_colors[d]);
        svg.text(84.0 + 110.0 * d, height - 9, kFeatureNames[d], 10.0);
    }
    return svg.str();
}

std::string render_crossscale_figure(const CrossScaleReport& report) {
    const double width = 760.0, height = 560.0;
    SvgWriter svg(width, height);
    svg.text(20, 26, "net reward per scale, grouped by feature-vector similarity", 14.0);
    svg.text(20, 44, "x: cluster centroid spread change, y: centroid imbalance change;"
                     " node size grows with scale", 10.0, "start", "#666666");

    double xmin = 0, xmax = 0, ymin = 0, ymax = 0, rmin = 0, rmax = 0;
    bool first = true, any_reward = false;
    for (const auto& cl : report.clusters) {
        const double x = cl.centroid[1], y = cl.centroid[3];
        if (first) {
            xmin = xmax = x;
            ymin = ymax = y;
            first = false;
        }
        xmin = std::min(xmin, x), xmax = std::max(xmax, x);
        ymin = std::min(ymin, y), ymax = std::max(ymax, y);
        for (const auto& [scale, r] : cl.net_reward) {
            (void)scale;
            if (!any_reward) {
                rmin = rmax = r;
                any_reward = true;
            }
            rmin = std::min(rmin, r), rmax = std::max(rmax, r);
        }
    }
    const double xpad = (xmax - xmin) * 0.15 + 1e-9, ypad = (ymax - ymin) * 0.15 + 1e-9;
    xmin -= xpad, xmax += xpad, ymin -= ypad, ymax += ypad;
    auto sx = [&](double x) { return 70.0 + (x - xmin) / (xmax - xmin) * (width - 140.0); };
    auto sy = [&](double y) { return height - 90.0 - (y - ymin) / (ymax - ymin) * (height - 170.0); };

    std::vector<int> scales = report.scales;
    std::sort(scales.begin(), scales.end());
    auto scale_rank = [&](int scale) {
        return static_cast<int>(std::find(scales.begin(), scales.end(), scale) - scales.begin());
    };
    auto reward_color = [&](double r) {
        const double t = rmax > rmin ? (r - rmin) / (rmax - rmin) : 0.5;
        return SvgWriter::lerp_color(t, kRed, kGreen);
    };

    for (const auto& cl : report.clusters) {
        const double cx = sx(cl.centroid[1]);
        const double cy = sy(cl.centroid[3]);
        svg.text(cx, cy - 34.0, "cluster " + std::to_string(cl.cluster_id), 11.0, "middle");
        int i = 0;
        const int n = static_cast<int>(cl.net_reward.size());
        for (const auto& [scale, r] : cl.net_reward) {
            // nodes of one cluster fan out on a small ring around its position
            const double angle = n > 0 ? 2.0 * 3.14159265358979323846 * i / n : 0.0;
            const double nx = cx + (n > 1 ? 22.0 * std::cos(angle) : 0.0);
            const double ny = cy + (n > 1 ? 22.0 * std::sin(angle) : 0.0);
            svg.circle(nx, ny, 5.0 + 2.5 * scale_rank(scale), reward_color(r), "node");
            ++i;
        }
    }

    // legend (rects and text only; circles are reserved for nodes)
    double lx = 70.0;
    const double ly = height - 40.0;
    for (int scale : scales) {
        svg.rect(lx, ly - 8, 10, 10, "#888888");
        svg.text(lx + 14, ly, std::to_string(scale) + " min (r=" +
                                  format_double(5.0 + 2.5 * scale_rank(scale)) + ")",
                 10.0);
        lx += 110.0;
    }
    svg.rect(lx, ly - 8, 10, 10, reward_color(rmin));
    svg.text(lx + 14, ly, "low reward " + format_double(rmin), 10.0);
    svg.rect(lx + 130, ly - 8, 10, 10, reward_color(rmax));
    svg.text(lx + 144, ly, "high reward " + format_double(rmax), 10.0);
    return svg.str();
}

void emit_report(const CrossScaleReport& report, const std::vector<ScaleRunResult>& results,
                 const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir);

    write_file(fs::path(out_dir) / "report.json", report_to_json(report));
    write_file(fs::path(out_dir) / "cluster_rewards.csv", cluster_rewards_csv(report));
    for (const auto& r : results)
        write_file(fs::path(out_dir) / ("fig2_scale_" + std::to_string(r.scale_minutes) + ".svg"),
                   render_scale_figure(r));
    write_file(fs::path(out_dir) / "fig3_crossscale.svg", render_crossscale_figure(report));
}

} // namespace msirl
