#pragma once

#include "msirl/states.hpp"
#include "msirl/trajectories.hpp"

#include <string>
#include <vector>

namespace msirl {

// Dense [state][action][next_state] probability tensor with the raw counts it
// was estimated from. Rows are Laplace-smoothed with alpha; a row with no
// observations and alpha = 0 falls back to the uniform distribution.
struct TransitionModel {
    int num_states = 0;
    int num_actions = 0;
    double alpha = 0.0;
    std::vector<double> counts; // raw tallies, same layout as probs
    std::vector<double> probs;  // row-stochastic per (state, action)

    double p(int s, int a, int s2) const { return probs[(s * num_actions + a) * num_states + s2]; }
    double count(int s, int a, int s2) const { return counts[(s * num_actions + a) * num_states + s2]; }
};

// Counts consecutive (s_t, a_t, s_{t+1}) triples across all trajectories.
// With action_blind = true the tally ignores the action and every action
// shares the pooled row.
TransitionModel estimate_transitions(const std::vector<Trajectory>& trajectories, int num_states,
                                     double alpha, bool action_blind = false);

std::vector<double> estimate_start_distribution(const std::vector<Trajectory>& trajectories,
                                                int num_states);

struct MdpModel {
    int num_states = 0;
    int num_actions = kNumActions;
    TransitionModel transitions;
    double gamma = 1.0; // carried in the model; the finite-horizon solver does not use it
    std::vector<Point4> feature_matrix;    // |S| x 4, row s = state's signature vector
    std::vector<double> start_distribution; // sums to 1

    std::vector<double> state_rewards(const std::array<double, kFeatureDim>& theta) const;
};

MdpModel assemble_mdp(const StateModel& states, TransitionModel transitions,
                      std::vector<double> start_distribution, double gamma = 1.0);
// Dimension-checked assembly from raw parts (tests and persisted artifacts).
MdpModel assemble_mdp(std::vector<Point4> feature_matrix, TransitionModel transitions,
                      std::vector<double> start_distribution, double gamma = 1.0);

std::string mdp_to_json(const MdpModel& mdp);
MdpModel mdp_from_json(const std::string& text);

} // namespace msirl
