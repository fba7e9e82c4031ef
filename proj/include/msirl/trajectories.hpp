#pragma once

#include "msirl/ticks.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace msirl {

// Aggregate market action over a period, labeled from the sign of the
// period's average price return.
enum class Action : int { Buy = 0, Sell = 1, Neutral = 2 };
inline constexpr int kNumActions = 3;

const char* action_name(Action a);

// BUY if return > epsilon, SELL if return < -epsilon, NEUTRAL otherwise.
// Throws NonFiniteReturn (DataError) on NaN or infinity.
Action label_action(double avg_price_return, double epsilon = 0.0);

struct TrajectoryStep {
    int state = 0;
    Action action = Action::Neutral;

    bool operator==(const TrajectoryStep&) const = default;
};

// One episode: the chronological (state, action) sequence of a single trading
// session at one scale. Never spans a session boundary or a data gap.
struct Trajectory {
    int scale_minutes = 0;
    std::string session_date; // ISO date of the session
    std::vector<TrajectoryStep> steps;
};

// Builds one trajectory per contiguous same-session period chain. The i-th
// assignment must describe the i-th aggregate (AlignmentMismatch otherwise);
// the action of step t labels period t itself.
std::vector<Trajectory> build_trajectories(const std::vector<int>& assignments,
                                           const std::vector<PeriodAggregate>& aggregates,
                                           double epsilon = 0.0);

// JSON lines, one trajectory per line.
void serialize_trajectories_jsonl(std::ostream& out, const std::vector<Trajectory>& trajectories);
std::vector<Trajectory> parse_trajectories_jsonl(std::istream& in);

} // namespace msirl
