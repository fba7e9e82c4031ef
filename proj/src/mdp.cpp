#include "msirl/mdp.hpp"

#include "msirl/errors.hpp"

#include <json.hpp>

#include <cmath>

namespace msirl {

TransitionModel estimate_transitions(const std::vector<Trajectory>& trajectories, int num_states,
                                     double alpha, bool action_blind) {
    if (num_states < 1) throw ConfigError("estimate_transitions: num_states must be >= 1");
    if (alpha < 0.0) throw ConfigError("estimate_transitions: alpha must be >= 0");

    TransitionModel t;
    t.num_states = num_states;
    t.num_actions = kNumActions;
    t.alpha = alpha;
    t.counts.assign(static_cast<std::size_t>(num_states) * kNumActions * num_states, 0.0);
    t.probs.assign(t.counts.size(), 0.0);

    auto check_state = [&](int s) {
        if (s < 0 || s >= num_states)
            throw DataError("InvalidStateId: " + std::to_string(s) + " outside [0, " +
                            std::to_string(num_states) + ")");
    };

    for (const auto& traj : trajectories) {
        for (const auto& step : traj.steps) check_state(step.state);
        for (std::size_t i = 0; i + 1 < traj.steps.size(); ++i) {
            const int s = traj.steps[i].state;
            const int s2 = traj.steps[i + 1].state;
            if (action_blind) {
                for (int a = 0; a < kNumActions; ++a)
                    t.counts[(s * kNumActions + a) * num_states + s2] += 1.0;
            } else {
                const int a = static_cast<int>(traj.steps[i].action);
                t.counts[(s * kNumActions + a) * num_states + s2] += 1.0;
            }
        }
    }

    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < kNumActions; ++a) {
            const std::size_t row = (static_cast<std::size_t>(s) * kNumActions + a) * num_states;
            double row_count = 0.0;
            for (int s2 = 0; s2 < num_states; ++s2) row_count += t.counts[row + s2];
            if (row_count == 0.0 && alpha == 0.0) {
                for (int s2 = 0; s2 < num_states; ++s2) t.probs[row + s2] = 1.0 / num_states;
            } else {
                const double denom = row_count + alpha * num_states;
                for (int s2 = 0; s2 < num_states; ++s2)
                    t.probs[row + s2] = (t.counts[row + s2] + alpha) / denom;
            }
        }
    }
    return t;
}

std::vector<double> estimate_start_distribution(const std::vector<Trajectory>& trajectories,
                                                int num_states) {
    if (trajectories.empty()) throw DataError("EmptyTrajectories: no trajectories");
    std::vector<double> d(num_states, 0.0);
    for (const auto& traj : trajectories) {
        if (traj.steps.empty()) throw DataError("EmptyTrajectories: trajectory with no steps");
        const int s = traj.steps.front().state;
        if (s < 0 || s >= num_states)
            throw DataError("InvalidStateId: " + std::to_string(s));
        d[s] += 1.0;
    }
    for (double& x : d) x /= static_cast<double>(trajectories.size());
    return d;
}

std::vector<double> MdpModel::state_rewards(const std::array<double, kFeatureDim>& theta) const {
    std::vector<double> r(num_states, 0.0);
    for (int s = 0; s < num_states; ++s)
        for (int d = 0; d < kFeatureDim; ++d) r[s] += feature_matrix[s][d] * theta[d];
    return r;
}

MdpModel assemble_mdp(std::vector<Point4> feature_matrix, TransitionModel transitions,
                      std::vector<double> start_distribution, double gamma) {
    MdpModel m;
    m.num_states = transitions.num_states;
    m.num_actions = transitions.num_actions;
    if (static_cast<int>(feature_matrix.size()) != m.num_states)
        throw DataError("DimensionMismatch: feature matrix has " +
                        std::to_string(feature_matrix.size()) + " rows for " +
                        std::to_string(m.num_states) + " states");
    if (static_cast<int>(start_distribution.size()) != m.num_states)
        throw DataError("DimensionMismatch: start distribution has " +
                        std::to_string(start_distribution.size()) + " entries for " +
                        std::to_string(m.num_states) + " states");
    double sum = 0.0;
    for (double p : start_distribution) {
        if (p < 0.0) throw DataError("start distribution has a negative entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw DataError("start distribution sums to " + std::to_string(sum) + ", expected 1");
    if (!(gamma > 0.0) || gamma > 1.0) throw ConfigError("gamma must be in (0, 1]");
    m.transitions = std::move(transitions);
    m.gamma = gamma;
    m.feature_matrix = std::move(feature_matrix);
    m.start_distribution = std::move(start_distribution);
    return m;
}

MdpModel assemble_mdp(const StateModel& states, TransitionModel transitions,
                      std::vector<double> start_distribution, double gamma) {
    if (states.k != transitions.num_states)
        throw DataError("DimensionMismatch: state model has " + std::to_string(states.k) +
                        " states, transitions have " + std::to_string(transitions.num_states));
    return assemble_mdp(state_feature_matrix(states), std::move(transitions),
                        std::move(start_distribution), gamma);
}

std::string mdp_to_json(const MdpModel& mdp) {
    nlohmann::json j;
    j["kind"] = "mdp";
    j["num_states"] = mdp.num_states;
    j["num_actions"] = mdp.num_actions;
    j["alpha"] = mdp.transitions.alpha;
    j["gamma"] = mdp.gamma;
    j["feature_matrix"] = mdp.feature_matrix;
    j["start_distribution"] = mdp.start_distribution;
    j["transition_counts"] = mdp.transitions.counts;
    j["transition_probs"] = mdp.transitions.probs;
    return j.dump(2);
}

MdpModel mdp_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    TransitionModel t;
    t.num_states = j.at("num_states").get<int>();
    t.num_actions = j.at("num_actions").get<int>();
    t.alpha = j.at("alpha").get<double>();
    t.counts = j.at("transition_counts").get<std::vector<double>>();
    t.probs = j.at("transition_probs").get<std::vector<double>>();
    const std::size_t expect = static_cast<std::size_t>(t.num_states) * t.num_actions * t.num_states;
    if (t.counts.size() != expect || t.probs.size() != expect)
        throw DataError("mdp JSON: tensor size mismatch");
    return assemble_mdp(j.at("feature_matrix").get<std::vector<Point4>>(), std::move(t),
                        j.at("start_distribution").get<std::vector<double>>(),
                        j.at("gamma").get<double>());
}

} // namespace msirl
