#pragma once

// Independent test oracles. Everything here re-derives expected values with
// its own arithmetic (brute force, enumeration, sampling, finite differences)
// and must stay decoupled from the implementation paths it checks.

#include "msirl/maxent.hpp"
#include "msirl/mdp.hpp"
#include "msirl/states.hpp"
#include "msirl/ticks.hpp"

#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

namespace oracles {

using msirl::MdpModel;
using msirl::PeriodAggregate;
using msirl::Point4;
using msirl::SessionHours;
using msirl::Theta;
using msirl::TickRecord;
using msirl::Trajectory;

// Brute-force bucket-and-average resampling: groups ticks by period key in a
// map and averages per bucket, recomputing returns from scratch.
std::vector<PeriodAggregate> brute_force_resample(const std::vector<TickRecord>& ticks,
                                                  int scale_minutes, const SessionHours& session);

// Two-pass mean / population std of one dimension of a sample.
std::pair<double, double> two_pass_mean_std(const std::vector<double>& xs);

// Exhaustive minimum within-cluster sum of squares over all partitions of the
// points into exactly k non-empty groups. Returns {best WCSS, best labels}.
std::pair<double, std::vector<int>> exhaustive_partition_wcss(const std::vector<Point4>& points,
                                                              int k);

// Transition tally on a std::map keyed by (s, a, s2).
std::map<std::tuple<int, int, int>, long> tally_transitions(const std::vector<Trajectory>& trajs);

// --- maximum-entropy path distribution oracles ------------------------------

// Every horizon-length path (s_0, a_0, ..., s_{H-1}, a_{H-1}) with its
// probability: exp(sum of rewards) times the product of transition
// probabilities, normalized per start state and weighted by the start
// distribution.
struct EnumeratedPaths {
    std::vector<Trajectory> paths;
    std::vector<double> probability;
};
EnumeratedPaths enumerate_paths(const MdpModel& mdp, const std::vector<double>& rewards,
                                int horizon);

// Monte Carlo sampler of the same distribution, built on an oracle-side
// partition table. Returns per-state visit totals for each rollout.
std::vector<std::vector<int>> mc_rollout_visits(const MdpModel& mdp,
                                                const std::vector<double>& rewards, int horizon,
                                                int rollouts, std::uint64_t seed);

// Central finite differences of the summed log-likelihood.
Theta fd_gradient(const std::vector<Trajectory>& trajs, const MdpModel& mdp, int horizon,
                  const Theta& theta, double step = 1e-5);

// --- statistics ---------------------------------------------------------------

double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

// --- random instances -----------------------------------------------------------

MdpModel random_mdp(int num_states, int num_actions, std::uint64_t seed);
// Uniform-random action walk through the MDP's transitions; any trajectory
// distribution works for gradient identities.
std::vector<Trajectory> random_walk_trajectories(const MdpModel& mdp, int count, int length,
                                                 std::uint64_t seed);

} // namespace oracles
