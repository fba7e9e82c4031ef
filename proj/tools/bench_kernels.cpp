// Benchmark of the OpenMP kernels against their serial reference
// implementations: k-means assignment, the backward partition sweep and the
// forward visitation sweep. Also times one full k-means fit.

#include "msirl/maxent.hpp"
#include "msirl/mdp.hpp"
#include "msirl/rng.hpp"
#include "msirl/states.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
    auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    auto dt = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    return dt / reps;
}

void report(const char* name, double serial_ms, double omp_ms) {
    std::printf("%-28s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx\n", name, serial_ms, omp_ms,
                serial_ms / omp_ms);
}

msirl::MdpModel random_mdp(int ns, int na, std::uint64_t seed) {
    auto rng = msirl::make_rng(seed, "bench-mdp");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    msirl::TransitionModel t;
    t.num_states = ns;
    t.num_actions = na;
    t.counts.assign(static_cast<std::size_t>(ns) * na * ns, 0.0);
    t.probs.resize(t.counts.size());
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < na; ++a) {
            double row = 0.0;
            for (int s2 = 0; s2 < ns; ++s2) {
                const double w = 0.01 + u(rng);
                t.probs[(s * na + a) * ns + s2] = w;
                row += w;
            }
            for (int s2 = 0; s2 < ns; ++s2) t.probs[(s * na + a) * ns + s2] /= row;
        }
    std::vector<msirl::Point4> f(ns);
    for (auto& row : f)
        for (int d = 0; d < msirl::kFeatureDim; ++d) row[d] = 2.0 * u(rng) - 1.0;
    std::vector<double> start(ns, 1.0 / ns);
    return msirl::assemble_mdp(std::move(f), std::move(t), std::move(start));
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both columns run serial code\n\n");
#endif

    // --- k-means assignment: 200k points, 64 centroids ---
    {
        auto rng = msirl::make_rng(1, "bench-points");
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<msirl::Point4> points(200'000), centroids(64);
        for (auto& p : points)
            for (auto& x : p) x = g(rng);
        for (auto& c : centroids)
            for (auto& x : c) x = g(rng);
        std::vector<int> out_serial(points.size()), out_omp(points.size());

        const double s = time_ms([&] { msirl::reference::assign_nearest(points, centroids, out_serial); }, 5);
        const double p = time_ms([&] { msirl::assign_nearest(points, centroids, out_omp); }, 5);
        report("assign_nearest 200k x 64", s, p);
        if (out_serial != out_omp) std::printf("  MISMATCH between serial and omp assignments!\n");
    }

    // --- backward / forward sweeps: 512 states, 3 actions ---
    {
        const int ns = 512, na = 3, horizon = 32;
        msirl::MdpModel mdp = random_mdp(ns, na, 2);
        msirl::Theta theta = {0.3, -0.2, 0.1, 0.4};
        std::vector<double> rewards = mdp.state_rewards(theta);

        msirl::MaxEntPolicy pol = msirl::backward_pass(mdp, theta, horizon);
        std::vector<double> table(static_cast<std::size_t>(horizon + 1) * ns, 0.0);
        std::vector<double> d0(mdp.start_distribution), d_serial(ns);

        const double bs = time_ms(
            [&] {
                for (int k = 1; k <= horizon; ++k)
                    msirl::reference::backward_step(mdp, rewards, &table[(k - 1) * ns], &table[k * ns]);
            },
            5);
        const double bp = time_ms([&] { msirl::backward_pass_rewards(mdp, rewards, horizon); }, 5);
        report("backward pass 512x3 H=32", bs, bp);

        const double fs = time_ms(
            [&] {
                std::vector<double> d = d0;
                for (int t = 0; t + 1 < horizon; ++t) {
                    msirl::reference::forward_step(mdp, pol, t, d.data(), d_serial.data());
                    d = d_serial;
                }
            },
            5);
        const double fp = time_ms([&] { msirl::forward_pass(mdp, pol); }, 5);
        report("forward pass 512x3 H=32", fs, fp);
    }

    // --- full k-means fit, restarts in parallel ---
    {
        auto rng = msirl::make_rng(3, "bench-kmeans");
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<msirl::Point4> points(50'000);
        for (std::size_t i = 0; i < points.size(); ++i)
            for (auto& x : points[i]) x = g(rng) + static_cast<double>(i % 8);

        const double one = time_ms([&] { msirl::kmeans_fit(points, 8, 7, 1, 25); }, 1);
        const double eight = time_ms([&] { msirl::kmeans_fit(points, 8, 7, 8, 25); }, 1);
        std::printf("%-28s 1 restart %7.1f ms   8 restarts %7.1f ms (parallel)\n",
                    "kmeans_fit 50k x 8", one, eight);
    }
    return 0;
}
