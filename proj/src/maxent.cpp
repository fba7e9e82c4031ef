#include "msirl/maxent.hpp"

#include "msirl/errors.hpp"
#include "msirl/numeric.hpp"
#include "msirl/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace msirl {

namespace {

void check_finite_theta(const Theta& theta) {
    for (double x : theta)
        if (!std::isfinite(x)) throw SolverError("NonFiniteTheta: theta has a non-finite component");
}

double inf_norm(const Theta& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// log z for one state given the previous sweep; shared by the OpenMP and
// reference kernels so both are bit-identical by construction.
double state_log_z(const MdpModel& mdp, const std::vector<double>& rewards,
                   const double* log_z_prev, int s) {
    const int na = mdp.num_actions;
    const int ns = mdp.num_states;
    // LSE over actions of (r_s + LSE over s' of (log P + log z_prev))
    double max_la = kNegInf;
    double las[64];
    for (int a = 0; a < na; ++a) {
        double m = kNegInf;
        for (int s2 = 0; s2 < ns; ++s2) {
            const double p = mdp.transitions.p(s, a, s2);
            if (p <= 0.0) continue;
            m = std::max(m, std::log(p) + log_z_prev[s2]);
        }
        double acc = 0.0;
        if (std::isfinite(m)) {
            for (int s2 = 0; s2 < ns; ++s2) {
                const double p = mdp.transitions.p(s, a, s2);
                if (p <= 0.0) continue;
                acc += std::exp(std::log(p) + log_z_prev[s2] - m);
            }
        }
        const double la = std::isfinite(m) ? rewards[s] + m + std::log(acc) : kNegInf;
        las[a] = la;
        max_la = std::max(max_la, la);
    }
    if (!std::isfinite(max_la)) return kNegInf;
    double acc = 0.0;
    for (int a = 0; a < na; ++a) acc += std::exp(las[a] - max_la);
    return max_la + std::log(acc);
}

} // namespace

void reference::backward_step(const MdpModel& mdp, const std::vector<double>& rewards,
                              const double* log_z_prev, double* log_z_out) {
    for (int s = 0; s < mdp.num_states; ++s)
        log_z_out[s] = state_log_z(mdp, rewards, log_z_prev, s);
}

namespace {

void backward_step_omp(const MdpModel& mdp, const std::vector<double>& rewards,
                       const double* log_z_prev, double* log_z_out) {
    const int ns = mdp.num_states;
#pragma omp parallel for schedule(static)
    for (int s = 0; s < ns; ++s) log_z_out[s] = state_log_z(mdp, rewards, log_z_prev, s);
}

} // namespace

MaxEntPolicy::MaxEntPolicy(int num_states, int num_actions, int horizon)
    : num_states_(num_states),
      num_actions_(num_actions),
      horizon_(horizon),
      log_z_(static_cast<std::size_t>(horizon + 1) * num_states, 0.0),
      rewards_(num_states, 0.0),
      policy_(static_cast<std::size_t>(num_states) * num_actions, 0.0) {}

MaxEntPolicy backward_pass_rewards(const MdpModel& mdp, const std::vector<double>& rewards,
                                   int horizon) {
    if (horizon < 1) throw ConfigError("backward_pass: horizon must be >= 1");
    if (static_cast<int>(rewards.size()) != mdp.num_states)
        throw DataError("DimensionMismatch: reward vector length vs num_states");
    if (mdp.num_actions > 64) throw ConfigError("backward_pass: more than 64 actions unsupported");
    for (double r : rewards)
        if (!std::isfinite(r)) throw SolverError("NonFiniteTheta: non-finite state reward");

    MaxEntPolicy pol(mdp.num_states, mdp.num_actions, horizon);
    pol.rewards_ = rewards;
    for (int k = 1; k <= horizon; ++k)
        backward_step_omp(mdp, rewards, &pol.log_z_[(k - 1) * static_cast<std::size_t>(mdp.num_states)],
                          &pol.log_z_[k * static_cast<std::size_t>(mdp.num_states)]);

    // Action distribution at the start of the horizon.
    const double* zprev = &pol.log_z_[(horizon - 1) * static_cast<std::size_t>(mdp.num_states)];
    for (int s = 0; s < mdp.num_states; ++s) {
        double las[64];
        double max_la = kNegInf;
        for (int a = 0; a < mdp.num_actions; ++a) {
            double terms_m = kNegInf;
            for (int s2 = 0; s2 < mdp.num_states; ++s2) {
                const double p = mdp.transitions.p(s, a, s2);
                if (p <= 0.0) continue;
                terms_m = std::max(terms_m, std::log(p) + zprev[s2]);
            }
            double acc = 0.0;
            if (std::isfinite(terms_m))
                for (int s2 = 0; s2 < mdp.num_states; ++s2) {
                    const double p = mdp.transitions.p(s, a, s2);
                    if (p <= 0.0) continue;
                    acc += std::exp(std::log(p) + zprev[s2] - terms_m);
                }
            las[a] = std::isfinite(terms_m) ? rewards[s] + terms_m + std::log(acc) : kNegInf;
            max_la = std::max(max_la, las[a]);
        }
        double norm = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a) norm += std::exp(las[a] - max_la);
        for (int a = 0; a < mdp.num_actions; ++a)
            pol.policy_[static_cast<std::size_t>(s) * mdp.num_actions + a] =
                std::exp(las[a] - max_la) / norm;
    }
    return pol;
}

MaxEntPolicy backward_pass(const MdpModel& mdp, const Theta& theta, int horizon) {
    check_finite_theta(theta);
    return backward_pass_rewards(mdp, mdp.state_rewards(theta), horizon);
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

namespace {

// Both forward kernels compute, for a fixed successor state s2, the sum over
// (s, a) of d_t[s] times the local conditional
//   P(a, s2 | s, t) = exp(r_s) * P[s][a][s2] * z_{k-1}(s2) / z_k(s)
// with k = horizon - t steps remaining at time t.
double next_state_mass(const MdpModel& mdp, const MaxEntPolicy& pol, int k, const double* d_t,
                       int s2) {
    const int ns = mdp.num_states;
    const int na = mdp.num_actions;
    const double lz_next = pol.log_z(k - 1, s2);
    double acc = 0.0;
    for (int s = 0; s < ns; ++s) {
        if (d_t[s] == 0.0) continue;
        const double base = pol.rewards()[s] + lz_next - pol.log_z(k, s);
        double w = 0.0;
        for (int a = 0; a < na; ++a) {
            const double p = mdp.transitions.p(s, a, s2);
            if (p <= 0.0) continue;
            w += std::exp(base + std::log(p));
        }
        acc += d_t[s] * w;
    }
    return acc;
}

} // namespace

void reference::forward_step(const MdpModel& mdp, const MaxEntPolicy& policy, int t,
                             const double* d_t, double* d_next) {
    const int k = policy.horizon() - t;
    for (int s2 = 0; s2 < mdp.num_states; ++s2)
        d_next[s2] = next_state_mass(mdp, policy, k, d_t, s2);
}

namespace {

void forward_step_omp(const MdpModel& mdp, const MaxEntPolicy& policy, int t, const double* d_t,
                      double* d_next) {
    const int k = policy.horizon() - t;
    const int ns = mdp.num_states;
#pragma omp parallel for schedule(static)
    for (int s2 = 0; s2 < ns; ++s2) d_next[s2] = next_state_mass(mdp, policy, k, d_t, s2);
}

} // namespace

Visitation forward_pass(const MdpModel& mdp, const MaxEntPolicy& policy) {
    const int ns = mdp.num_states;
    const int horizon = policy.horizon();
    if (policy.num_states() != ns || policy.num_actions() != mdp.num_actions)
        throw DataError("DimensionMismatch: policy and MDP disagree on dimensions");
    for (int s = 0; s < ns; ++s) {
        double row = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a) row += policy.pi(s, a);
        if (std::abs(row - 1.0) > 1e-9)
            throw SolverError("NonStochasticPolicy: row " + std::to_string(s) + " sums to " +
                              std::to_string(row));
    }

    Visitation v;
    v.per_step.assign(static_cast<std::size_t>(horizon) * ns, 0.0);
    v.total.assign(ns, 0.0);
    for (int s = 0; s < ns; ++s) v.per_step[s] = mdp.start_distribution[s];
    for (int t = 0; t + 1 < horizon; ++t)
        forward_step_omp(mdp, policy, t, &v.per_step[static_cast<std::size_t>(t) * ns],
                         &v.per_step[static_cast<std::size_t>(t + 1) * ns]);
    for (int t = 0; t < horizon; ++t)
        for (int s = 0; s < ns; ++s) v.total[s] += v.per_step[static_cast<std::size_t>(t) * ns + s];
    return v;
}

// ---------------------------------------------------------------------------

FeatureExpectations empirical_feature_expectations(const std::vector<Trajectory>& trajectories,
                                                   const std::vector<Point4>& feature_matrix) {
    if (trajectories.empty()) throw DataError("EmptyTrajectories: no trajectories");
    const int num_states = static_cast<int>(feature_matrix.size());
    const std::size_t len = trajectories.front().steps.size();
    if (len == 0) throw DataError("EmptyTrajectories: trajectory with no steps");

    FeatureExpectations fe;
    fe.m = static_cast<int>(trajectories.size());
    fe.horizon = static_cast<int>(len);
    for (const auto& traj : trajectories) {
        if (traj.steps.size() != len)
            throw DataError("UnequalLengths: trajectory lengths " + std::to_string(len) + " vs " +
                            std::to_string(traj.steps.size()));
        for (const auto& step : traj.steps) {
            if (step.state < 0 || step.state >= num_states)
                throw DataError("InvalidStateId: " + std::to_string(step.state));
            for (int d = 0; d < kFeatureDim; ++d) fe.f_tilde[d] += feature_matrix[step.state][d];
        }
    }
    for (int d = 0; d < kFeatureDim; ++d) fe.f_tilde[d] /= static_cast<double>(fe.m);
    return fe;
}

Theta gradient(const Theta& f_tilde, const std::vector<double>& visitation,
               const std::vector<Point4>& feature_matrix) {
    if (visitation.size() != feature_matrix.size())
        throw DataError("DimensionMismatch: visitation length vs feature matrix rows");
    Theta g = f_tilde;
    for (std::size_t s = 0; s < visitation.size(); ++s)
        for (int d = 0; d < kFeatureDim; ++d) g[d] -= visitation[s] * feature_matrix[s][d];
    return g;
}

double log_likelihood(const std::vector<Trajectory>& trajectories, const MdpModel& mdp,
                      const MaxEntPolicy& policy) {
    const int horizon = policy.horizon();
    double total = 0.0;
    for (const auto& traj : trajectories) {
        const int len = static_cast<int>(traj.steps.size());
        if (len < 1 || len > horizon)
            throw DataError("trajectory length " + std::to_string(len) +
                            " outside [1, horizon=" + std::to_string(horizon) + "]");
        const int s0 = traj.steps.front().state;
        if (s0 < 0 || s0 >= mdp.num_states) throw DataError("InvalidStateId: " + std::to_string(s0));
        const double p0 = mdp.start_distribution[s0];
        if (p0 <= 0.0) {
            total = kNegInf;
            continue;
        }
        double ll = std::log(p0) - policy.log_z(horizon, s0);
        for (int t = 0; t < len; ++t) {
            const auto& step = traj.steps[t];
            if (step.state < 0 || step.state >= mdp.num_states)
                throw DataError("InvalidStateId: " + std::to_string(step.state));
            const int a = static_cast<int>(step.action);
            if (a < 0 || a >= mdp.num_actions)
                throw DataError("invalid action id " + std::to_string(a));
            ll += policy.rewards()[step.state];
            if (t + 1 < len) {
                const double p = mdp.transitions.p(step.state, a, traj.steps[t + 1].state);
                ll = p > 0.0 ? ll + std::log(p) : kNegInf;
                if (!std::isfinite(ll)) break;
            }
        }
        // Prefixes shorter than the horizon marginalize over the unseen tail.
        if (std::isfinite(ll) && len < horizon) {
            const auto& last = traj.steps.back();
            const int a = static_cast<int>(last.action);
            double m = kNegInf;
            for (int s2 = 0; s2 < mdp.num_states; ++s2) {
                const double p = mdp.transitions.p(last.state, a, s2);
                if (p <= 0.0) continue;
                m = std::max(m, std::log(p) + policy.log_z(horizon - len, s2));
            }
            if (std::isfinite(m)) {
                double acc = 0.0;
                for (int s2 = 0; s2 < mdp.num_states; ++s2) {
                    const double p = mdp.transitions.p(last.state, a, s2);
                    if (p <= 0.0) continue;
                    acc += std::exp(std::log(p) + policy.log_z(horizon - len, s2) - m);
                }
                ll += m + std::log(acc);
            } else {
                ll = kNegInf;
            }
        }
        total += ll;
    }
    return total;
}

double log_likelihood(const std::vector<Trajectory>& trajectories, const Theta& theta,
                      const MdpModel& mdp, int horizon) {
    return log_likelihood(trajectories, mdp, backward_pass(mdp, theta, horizon));
}

std::vector<Trajectory> sample_paths(const MdpModel& mdp, const MaxEntPolicy& policy, int n,
                                     std::uint64_t seed) {
    const int ns = mdp.num_states;
    const int na = mdp.num_actions;
    const int horizon = policy.horizon();
    auto rng = make_rng(seed, "maxent-sample");
    std::uniform_real_distribution<double> u(0.0, 1.0);

    std::vector<Trajectory> out;
    out.reserve(n);
    std::vector<double> w(static_cast<std::size_t>(na) * ns);
    for (int i = 0; i < n; ++i) {
        Trajectory traj;
        traj.session_date = "sampled";
        // start state
        double x = u(rng);
        int s = ns - 1;
        double cum = 0.0;
        for (int j = 0; j < ns; ++j) {
            cum += mdp.start_distribution[j];
            if (x < cum) {
                s = j;
                break;
            }
        }
        for (int t = 0; t < horizon; ++t) {
            const int k = horizon - t;
            double total = 0.0;
            for (int a = 0; a < na; ++a)
                for (int s2 = 0; s2 < ns; ++s2) {
                    const double p = mdp.transitions.p(s, a, s2);
                    const double lw = p > 0.0 ? std::log(p) + policy.log_z(k - 1, s2) +
                                                    policy.rewards()[s] - policy.log_z(k, s)
                                              : kNegInf;
                    w[static_cast<std::size_t>(a) * ns + s2] = std::isfinite(lw) ? std::exp(lw) : 0.0;
                    total += w[static_cast<std::size_t>(a) * ns + s2];
                }
            double y = u(rng) * total;
            std::size_t pick = w.size() - 1;
            double c = 0.0;
            for (std::size_t j = 0; j < w.size(); ++j) {
                c += w[j];
                if (y < c) {
                    pick = j;
                    break;
                }
            }
            const int a = static_cast<int>(pick) / ns;
            const int s2 = static_cast<int>(pick) % ns;
            traj.steps.push_back({s, static_cast<Action>(a)});
            s = s2;
        }
        out.push_back(std::move(traj));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

IrlSolution fit(const MdpModel& mdp, const std::vector<Trajectory>& trajectories,
                const SolverConfig& config) {
    if (!(config.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (!(config.gradient_tolerance > 0.0)) throw ConfigError("gradient_tolerance must be > 0");
    if (config.max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
    check_finite_theta(config.theta_init);

    FeatureExpectations fexp = empirical_feature_expectations(trajectories, mdp.feature_matrix);
    const int horizon = config.horizon > 0 ? config.horizon : fexp.horizon;
    if (horizon < fexp.horizon)
        throw ConfigError("horizon " + std::to_string(horizon) + " shorter than trajectories of length " +
                          std::to_string(fexp.horizon));

    IrlSolution sol;
    sol.config = config;
    sol.horizon = horizon;
    sol.theta = config.theta_init;

    for (int iter = 0; iter < config.max_iterations; ++iter) {
        MaxEntPolicy pol = backward_pass(mdp, sol.theta, horizon);
        Visitation vis = forward_pass(mdp, pol);
        Theta g = gradient(fexp.f_tilde, vis.total, mdp.feature_matrix);
        sol.likelihood_trace.push_back(log_likelihood(trajectories, mdp, pol));
        sol.gradient_norm_trace.push_back(inf_norm(g));
        if (inf_norm(g) < config.gradient_tolerance) {
            sol.converged = true;
            break;
        }
        for (int d = 0; d < kFeatureDim; ++d) sol.theta[d] += config.learning_rate * g[d];
        sol.iterations_used = iter + 1;
        if (inf_norm(sol.theta) > config.divergence_bound)
            throw SolverError("DivergenceDetected: |theta|_inf = " +
                              std::to_string(inf_norm(sol.theta)) + " exceeds " +
                              std::to_string(config.divergence_bound));
    }

    MaxEntPolicy pol = backward_pass(mdp, sol.theta, horizon);
    Visitation vis = forward_pass(mdp, pol);
    sol.state_rewards = mdp.state_rewards(sol.theta);
    sol.visitation = std::move(vis.total);
    sol.policy = pol.policy_matrix();
    return sol;
}

// ---------------------------------------------------------------------------

std::string irl_solution_to_json(const IrlSolution& sol) {
    nlohmann::json j;
    j["kind"] = "irl_solution";
    j["theta"] = sol.theta;
    j["state_rewards"] = sol.state_rewards;
    j["visitation"] = sol.visitation;
    j["policy"] = sol.policy;
    j["likelihood_trace"] = sol.likelihood_trace;
    j["gradient_norm_trace"] = sol.gradient_norm_trace;
    j["converged"] = sol.converged;
    j["iterations_used"] = sol.iterations_used;
    j["horizon"] = sol.horizon;
    j["config"] = {{"learning_rate", sol.config.learning_rate},
                   {"max_iterations", sol.config.max_iterations},
                   {"gradient_tolerance", sol.config.gradient_tolerance},
                   {"horizon", sol.config.horizon},
                   {"theta_init", sol.config.theta_init},
                   {"divergence_bound", sol.config.divergence_bound}};
    return j.dump(2);
}

IrlSolution irl_solution_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    IrlSolution s;
    s.theta = j.at("theta").get<Theta>();
    s.state_rewards = j.at("state_rewards").get<std::vector<double>>();
    s.visitation = j.at("visitation").get<std::vector<double>>();
    s.policy = j.at("policy").get<std::vector<double>>();
    s.likelihood_trace = j.at("likelihood_trace").get<std::vector<double>>();
    s.gradient_norm_trace = j.at("gradient_norm_trace").get<std::vector<double>>();
    s.converged = j.at("converged").get<bool>();
    s.iterations_used = j.at("iterations_used").get<int>();
    s.horizon = j.at("horizon").get<int>();
    const auto& jc = j.at("config");
    s.config.learning_rate = jc.at("learning_rate").get<double>();
    s.config.max_iterations = jc.at("max_iterations").get<int>();
    s.config.gradient_tolerance = jc.at("gradient_tolerance").get<double>();
    s.config.horizon = jc.at("horizon").get<int>();
    s.config.theta_init = jc.at("theta_init").get<Theta>();
    s.config.divergence_bound = jc.at("divergence_bound").get<double>();
    return s;
}

} // namespace msirl
