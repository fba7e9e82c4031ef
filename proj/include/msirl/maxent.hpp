#pragma once

#include "msirl/mdp.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace msirl {

using Theta = std::array<double, kFeatureDim>;

// Average per-trajectory summed state features over m observed trajectories.
struct FeatureExpectations {
    Theta f_tilde{};
    int m = 0;
    int horizon = 0;
};

FeatureExpectations empirical_feature_expectations(const std::vector<Trajectory>& trajectories,
                                                   const std::vector<Point4>& feature_matrix);

// ---------------------------------------------------------------------------
// Finite-horizon maximum-entropy path distribution over H-step trajectories
// (s_0, a_0, ..., s_{H-1}, a_{H-1}) starting from the MDP's start states:
//
//   P(path | s_0) = exp(sum_t r(s_t)) * prod_t P[s_t][a_t][s_{t+1}] / Z(s_0)
//
// so paths of equal total reward are equally likely and preference grows
// exponentially with reward. The backward pass computes the per-step state
// partition values log z_k(s) (k = steps remaining), all in log-space.
// ---------------------------------------------------------------------------

class MaxEntPolicy {
public:
    MaxEntPolicy(int num_states, int num_actions, int horizon);

    int horizon() const { return horizon_; }
    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }

    // log z_k(s): log-partition over k-step path suffixes from state s.
    double log_z(int steps_remaining, int s) const {
        return log_z_[static_cast<std::size_t>(steps_remaining) * num_states_ + s];
    }
    const std::vector<double>& rewards() const { return rewards_; }

    // Local action distribution at the start of the horizon; rows sum to 1.
    const std::vector<double>& policy_matrix() const { return policy_; }
    double pi(int s, int a) const { return policy_[static_cast<std::size_t>(s) * num_actions_ + a]; }

private:
    friend MaxEntPolicy backward_pass_rewards(const MdpModel&, const std::vector<double>&, int);
    int num_states_;
    int num_actions_;
    int horizon_;
    std::vector<double> log_z_;   // (horizon+1) x |S|
    std::vector<double> rewards_; // |S|
    std::vector<double> policy_;  // |S| x |A|
};

// Backward pass under the linear reward r_s = theta . f_s.
MaxEntPolicy backward_pass(const MdpModel& mdp, const Theta& theta, int horizon);
// Backward pass for an explicit state reward vector.
MaxEntPolicy backward_pass_rewards(const MdpModel& mdp, const std::vector<double>& rewards,
                                   int horizon);

// Expected state visitation frequencies of the path distribution.
struct Visitation {
    std::vector<double> total;    // D_s = sum over t, length |S|
    std::vector<double> per_step; // D_{s,t}, horizon x |S| (row t, column s)

    double at(int t, int s, int num_states) const {
        return per_step[static_cast<std::size_t>(t) * num_states + s];
    }
};

// Exact forward pass: D_{.,0} is the MDP start distribution and each step
// propagates the path distribution's local conditional, which weights every
// transition by the partition value of the successor state. For
// deterministic transitions this reduces to pi(a|s) * P[s][a][s'].
Visitation forward_pass(const MdpModel& mdp, const MaxEntPolicy& policy);

// Gradient of the average per-trajectory log-likelihood:
// f_tilde - feature_matrix^T D.
Theta gradient(const Theta& f_tilde, const std::vector<double>& visitation,
               const std::vector<Point4>& feature_matrix);

// Sum over trajectories of log P(trajectory | theta, T). Trajectories shorter
// than the horizon are scored as path prefixes.
double log_likelihood(const std::vector<Trajectory>& trajectories, const Theta& theta,
                      const MdpModel& mdp, int horizon);
double log_likelihood(const std::vector<Trajectory>& trajectories, const MdpModel& mdp,
                      const MaxEntPolicy& policy);

// Draws n trajectories of length `horizon` from the path distribution.
std::vector<Trajectory> sample_paths(const MdpModel& mdp, const MaxEntPolicy& policy, int n,
                                     std::uint64_t seed);

// Serial reference sweeps used by the tests to pin down the OpenMP kernels.
namespace reference {
void backward_step(const MdpModel& mdp, const std::vector<double>& rewards,
                   const double* log_z_prev, double* log_z_out);
void forward_step(const MdpModel& mdp, const MaxEntPolicy& policy, int t, const double* d_t,
                  double* d_next);
} // namespace reference

// ---------------------------------------------------------------------------
// Solver: plain gradient ascent on theta.
// ---------------------------------------------------------------------------

struct SolverConfig {
    double learning_rate = 0.05;
    int max_iterations = 2000;
    double gradient_tolerance = 1e-4;
    int horizon = 0; // 0: use the (common) trajectory length
    Theta theta_init{};
    double divergence_bound = 1e3; // DivergenceDetected when |theta|_inf exceeds this
};

struct IrlSolution {
    Theta theta{};
    std::vector<double> state_rewards; // feature_matrix . theta
    std::vector<double> visitation;    // D_s at the returned theta
    std::vector<double> policy;        // |S| x |A|, rows sum to 1
    std::vector<double> likelihood_trace;
    std::vector<double> gradient_norm_trace;
    bool converged = false;
    int iterations_used = 0;
    int horizon = 0;
    SolverConfig config;
};

IrlSolution fit(const MdpModel& mdp, const std::vector<Trajectory>& trajectories,
                const SolverConfig& config);

std::string irl_solution_to_json(const IrlSolution& sol);
IrlSolution irl_solution_from_json(const std::string& text);

} // namespace msirl
