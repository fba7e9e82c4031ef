#include "msirl/trajectories.hpp"

#include "msirl/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <istream>
#include <ostream>

namespace msirl {

const char* action_name(Action a) {
    switch (a) {
        case Action::Buy: return "BUY";
        case Action::Sell: return "SELL";
        case Action::Neutral: return "NEUTRAL";
    }
    return "?";
}

Action label_action(double avg_price_return, double epsilon) {
    if (!std::isfinite(avg_price_return))
        throw DataError("NonFiniteReturn: cannot label a non-finite price return");
    if (avg_price_return > epsilon) return Action::Buy;
    if (avg_price_return < -epsilon) return Action::Sell;
    return Action::Neutral;
}

std::vector<Trajectory> build_trajectories(const std::vector<int>& assignments,
                                           const std::vector<PeriodAggregate>& aggregates,
                                           double epsilon) {
    if (assignments.size() != aggregates.size())
        throw DataError("AlignmentMismatch: " + std::to_string(assignments.size()) +
                        " assignments vs " + std::to_string(aggregates.size()) + " aggregates");

    std::vector<Trajectory> out;
    Trajectory cur;
    auto flush = [&]() {
        if (!cur.steps.empty()) out.push_back(std::move(cur));
        cur = Trajectory{};
    };

    for (std::size_t i = 0; i < aggregates.size(); ++i) {
        const auto& agg = aggregates[i];
        const std::int64_t scale_ms = static_cast<std::int64_t>(agg.scale_minutes) * 60'000;
        const bool chained = i > 0 && !cur.steps.empty() &&
                             day_index(agg.period_start_ms) == day_index(aggregates[i - 1].period_start_ms) &&
                             agg.period_start_ms == aggregates[i - 1].period_start_ms + scale_ms;
        if (!chained) {
            flush();
            cur.scale_minutes = agg.scale_minutes;
            cur.session_date = date_string_from_ms(agg.period_start_ms);
        }
        cur.steps.push_back({assignments[i], label_action(agg.avg_price_return, epsilon)});
    }
    flush();
    return out;
}

void serialize_trajectories_jsonl(std::ostream& out, const std::vector<Trajectory>& trajectories) {
    for (const auto& t : trajectories) {
        nlohmann::json j;
        j["scale_minutes"] = t.scale_minutes;
        j["session_date"] = t.session_date;
        auto steps = nlohmann::json::array();
        for (const auto& s : t.steps) steps.push_back({s.state, static_cast<int>(s.action)});
        j["steps"] = std::move(steps);
        out << j.dump() << '\n';
    }
}

std::vector<Trajectory> parse_trajectories_jsonl(std::istream& in) {
    std::vector<Trajectory> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw DataError("trajectory JSONL: bad JSON at line " + std::to_string(line_no));
        Trajectory t;
        t.scale_minutes = j.at("scale_minutes").get<int>();
        t.session_date = j.at("session_date").get<std::string>();
        for (const auto& js : j.at("steps")) {
            const int action = js.at(1).get<int>();
            if (action < 0 || action >= kNumActions)
                throw DataError("trajectory JSONL: bad action code at line " + std::to_string(line_no));
            t.steps.push_back({js.at(0).get<int>(), static_cast<Action>(action)});
        }
        if (t.steps.empty())
            throw DataError("trajectory JSONL: empty step list at line " + std::to_string(line_no));
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace msirl
