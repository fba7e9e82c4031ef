#include "msirl/crossscale.hpp"

#include "msirl/errors.hpp"
#include "msirl/rng.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace msirl;

namespace {

StateModel model_from_centroids(const std::vector<Point4>& centroids, int scale) {
    StateModel m;
    m.k = static_cast<int>(centroids.size());
    m.scale_minutes = scale;
    for (int j = 0; j < m.k; ++j) m.signatures.push_back({j, centroids[j], 1, scale});
    return m;
}

ScaleRunResult result_with(const std::vector<Point4>& centroids, std::vector<double> rewards,
                           int scale) {
    ScaleRunResult r;
    r.scale_minutes = scale;
    r.states = model_from_centroids(centroids, scale);
    r.irl.state_rewards = rewards;
    r.normalized_rewards = normalize_rewards(rewards);
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
    std::size_t n = 0, pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

} // namespace

TEST_CASE("two-point z-score") {
    CHECK(normalize_rewards({1.0, 3.0}) == std::vector<double>{-1.0, 1.0});
}

TEST_CASE("constant rewards normalize to zero") {
    CHECK(normalize_rewards({5.0, 5.0, 5.0}) == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("normalization matches the two-pass oracle and preserves order") {
    auto rng = make_rng(3, "test-rewards");
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::vector<double> rewards(40);
    for (double& r : rewards) r = u(rng);
    auto z = normalize_rewards(rewards);
    auto [mu, sd] = oracles::two_pass_mean_std(rewards);
    for (std::size_t i = 0; i < rewards.size(); ++i)
        CHECK(z[i] == doctest::Approx((rewards[i] - mu) / sd).epsilon(1e-12));
    auto [zmu, zsd] = oracles::two_pass_mean_std(z);
    CHECK(std::abs(zmu) < 1e-12);
    CHECK(zsd == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 1; i < rewards.size(); ++i)
        CHECK((rewards[i - 1] < rewards[i]) == (z[i - 1] < z[i]));
}

TEST_CASE("one scale with as many states as clusters is the identity partition") {
    std::vector<Point4> centroids = {{0, 0, 0, 0}, {5, 0, 0, 0}, {0, 5, 0, 0}, {5, 5, 0, 0}};
    auto r = result_with(centroids, {1.0, 2.0, 3.0, 4.0}, 5);
    auto report = cluster_across_scales({r}, 4, 7);
    REQUIRE(report.clusters.size() == 4);
    for (const auto& cl : report.clusters) CHECK(cl.members.size() == 1);
}

TEST_CASE("identical state models across scales land in shared clusters") {
    std::vector<Point4> centroids = {{0, 0, 0, 0}, {5, 0, 0, 0}, {0, 5, 0, 0}};
    auto a = result_with(centroids, {1.0, 2.0, 3.0}, 5);
    auto b = result_with(centroids, {2.0, 1.0, 0.0}, 60);
    auto report = cluster_across_scales({a, b}, 3, 11);
    for (const auto& cl : report.clusters) {
        REQUIRE(cl.members.size() == 2);
        CHECK(cl.members[0].second == cl.members[1].second); // same state id at both scales
        CHECK(cl.members[0].first == 5);
        CHECK(cl.members[1].first == 60);
    }
}

TEST_CASE("pooled toy instance matches the exhaustive partition optimum") {
    std::vector<Point4> group_a = {{0, 0, 0, 0}, {0.2, 0, 0, 0}, {0, 0.2, 0, 0}};
    std::vector<Point4> group_b = {{8, 8, 0, 0}, {8.2, 8, 0, 0}, {8, 8.2, 0, 0}};
    auto a = result_with({group_a[0], group_a[1], group_b[0]}, {1, 2, 3}, 5);
    auto b = result_with({group_a[2], group_b[1], group_b[2]}, {4, 5, 6}, 15);
    auto report = cluster_across_scales({a, b}, 2, 13);

    std::vector<Point4> pooled = {group_a[0], group_a[1], group_b[0],
                                  group_a[2], group_b[1], group_b[2]};
    auto [best, labels] = oracles::exhaustive_partition_wcss(pooled, 2);
    (void)labels;
    // recompute the report's WCSS from its member lists
    double got = 0.0;
    for (const auto& cl : report.clusters) {
        Point4 mean{};
        std::vector<Point4> pts;
        for (auto [scale, state] : cl.members) {
            const auto& model = scale == 5 ? a.states : b.states;
            pts.push_back(model.signatures[state].centroid);
            for (int d = 0; d < kFeatureDim; ++d) mean[d] += pts.back()[d];
        }
        for (int d = 0; d < kFeatureDim; ++d) mean[d] /= static_cast<double>(pts.size());
        for (const auto& p : pts)
            for (int d = 0; d < kFeatureDim; ++d) got += (p[d] - mean[d]) * (p[d] - mean[d]);
    }
    CHECK(got == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("too few pooled states") {
    auto a = result_with({{0, 0, 0, 0}, {1, 0, 0, 0}}, {1.0, 2.0}, 5);
    CHECK_THROWS_WITH_AS(cluster_across_scales({a}, 6, 1), doctest::Contains("TooFewStates"),
                         DataError);
}

TEST_CASE("net rewards aggregate per member scale, absent when empty") {
    auto a = result_with({{0, 0, 0, 0}, {9, 9, 9, 9}}, {1.0, 3.0}, 5);
    auto b = result_with({{9, 9, 9, 9}, {9.1, 9, 9, 9}}, {4.0, 6.0}, 60);
    auto report = cluster_across_scales({a, b}, 2, 17);
    aggregate_cluster_rewards(report, {a, b});

    // cluster 0 holds only 5-min state 0 (normalized reward -1)
    const auto& lone = report.clusters[0];
    REQUIRE(lone.members.size() == 1);
    CHECK(lone.net_reward.at(5) == doctest::Approx(-1.0));
    CHECK(lone.net_reward.count(60) == 0);

    // cluster 1 holds 5-min state 1 (+1) and both 60-min states (-1, +1 -> 0)
    const auto& shared = report.clusters[1];
    CHECK(shared.net_reward.at(5) == doctest::Approx(1.0));
    CHECK(shared.net_reward.at(60) == doctest::Approx(0.0));
    CHECK(shared.member_count.at(60) == 2);
}

TEST_CASE("aggregation matches a group-by-sum oracle") {
    auto rng = make_rng(5, "test-agg");
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<ScaleRunResult> results;
    for (int scale : {5, 15, 30, 60}) {
        std::vector<Point4> centroids(6);
        std::vector<double> rewards(6);
        for (auto& c : centroids)
            for (auto& x : c) x = g(rng);
        for (auto& r : rewards) r = g(rng);
        results.push_back(result_with(centroids, rewards, scale));
    }
    auto report = cluster_across_scales(results, 4, 19);
    aggregate_cluster_rewards(report, results);

    std::map<std::pair<int, int>, double> oracle; // (cluster, scale) -> sum
    for (const auto& cl : report.clusters)
        for (auto [scale, state] : cl.members)
            for (const auto& r : results)
                if (r.scale_minutes == scale)
                    oracle[{cl.cluster_id, scale}] += r.normalized_rewards[state];
    for (const auto& cl : report.clusters)
        for (const auto& [scale, net] : cl.net_reward)
            CHECK(net == doctest::Approx(oracle.at({cl.cluster_id, scale})).epsilon(1e-12));

    // partition property: every (scale, state) appears exactly once
    std::size_t total = 0;
    for (const auto& cl : report.clusters) total += cl.members.size();
    CHECK(total == 24);

    // z-score property: each scale's net rewards across clusters sum to zero
    for (int scale : {5, 15, 30, 60}) {
        double sum = 0.0;
        for (const auto& cl : report.clusters) {
            auto it = cl.net_reward.find(scale);
            if (it != cl.net_reward.end()) sum += it->second;
        }
        CHECK(std::abs(sum) < 1e-9);
    }
}

TEST_CASE("emit_report writes deterministic files with one node per (cluster, scale)") {
    auto rng = make_rng(9, "test-emit");
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<ScaleRunResult> results;
    for (int scale : {5, 15, 30, 60}) {
        std::vector<Point4> centroids(6);
        std::vector<double> rewards(6);
        for (auto& c : centroids)
            for (auto& x : c) x = g(rng);
        for (auto& r : rewards) r = g(rng);
        results.push_back(result_with(centroids, rewards, scale));
    }
    auto report = cluster_across_scales(results, 6, 23);
    aggregate_cluster_rewards(report, results);

    namespace fs = std::filesystem;
    const fs::path dir_a = fs::temp_directory_path() / "msirl_test_report_a";
    const fs::path dir_b = fs::temp_directory_path() / "msirl_test_report_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    emit_report(report, results, dir_a.string());
    emit_report(report, results, dir_b.string());

    for (const char* name : {"report.json", "cluster_rewards.csv", "fig3_crossscale.svg",
                             "fig2_scale_5.svg", "fig2_scale_60.svg"}) {
        CAPTURE(name);
        const std::string a = slurp(dir_a / name);
        CHECK(a == slurp(dir_b / name));
        CHECK_FALSE(a.empty());
    }

    std::size_t want_nodes = 0;
    for (const auto& cl : report.clusters) want_nodes += cl.net_reward.size();
    const std::string fig3 = slurp(dir_a / "fig3_crossscale.svg");
    CHECK(count_occurrences(fig3, "class=\"node\"") == want_nodes);

    // round-trip: parsing the emitted JSON reproduces the report exactly
    auto back = report_from_json(slurp(dir_a / "report.json"));
    CHECK(report_to_json(back) == report_to_json(report));
    CHECK(back.clusters.size() == report.clusters.size());
    for (std::size_t c = 0; c < back.clusters.size(); ++c) {
        CHECK(back.clusters[c].members == report.clusters[c].members);
        CHECK(back.clusters[c].net_reward == report.clusters[c].net_reward);
        CHECK(back.clusters[c].centroid == report.clusters[c].centroid);
    }

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("missing reward is reported") {
    auto a = result_with({{0, 0, 0, 0}, {5, 5, 5, 5}}, {1.0, 2.0}, 5);
    auto report = cluster_across_scales({a}, 2, 29);
    std::vector<ScaleRunResult> wrong; // no scale-5 result present
    CHECK_THROWS_WITH_AS(aggregate_cluster_rewards(report, wrong), doctest::Contains("MissingReward"),
                         DataError);
}
