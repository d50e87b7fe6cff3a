#include "valence/assessment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "valence/front_io.hpp"
#include "valence/scenario_io.hpp"

namespace valence {

using nlohmann::ordered_json;

namespace {
constexpr int kFixedScale = 100;
}

void FixedSum::add(double x) {
    double scaled = std::ldexp(x, kFixedScale);
    if (!std::isfinite(x) || std::abs(scaled) >= std::ldexp(1.0, 126))
        throw ContractViolation("score out of range for exact accumulation");
    raw_ += static_cast<wide>(std::nearbyint(scaled));
}

double FixedSum::value() const {
    // int128 -> double rounds to nearest; the power-of-two scaling is exact.
    return std::ldexp(static_cast<double>(raw_), -kFixedScale);
}

TrajectoryScore score_trajectory(const Scenario& scenario, const Trajectory& t, double gamma) {
    if (t.scenario_hash != scenario_hash(scenario))
        throw IntegrityError(-1, "trajectory was recorded against a different scenario (hash " + t.scenario_hash + ")");
    std::size_t dims = scenario.values.size();
    TrajectoryScore out;
    out.cumulative.assign(dims, 0.0);
    bool exact = gamma == 1.0;
    if (exact) out.exact.assign(dims, FixedSum{});
    double discount = 1.0;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const auto& s = t.steps[i];
        int idx = static_cast<int>(i);
        auto fail = [&](const std::string& why) {
            throw IntegrityError(idx, "step " + std::to_string(i) + ": " + why);
        };
        if (!scenario.well_formed(s.state) || !scenario.well_formed(s.next_state)) fail("state is not well formed");
        if (i > 0 && !(t.steps[i - 1].next_state == s.state))
            fail("state " + scenario.describe(s.state) + " does not continue from " +
                 scenario.describe(t.steps[i - 1].next_state));
        if (is_terminal(scenario, s.state)) fail("action taken in a terminal state");
        auto avail = available_actions(scenario, s.state);
        if (std::find(avail.begin(), avail.end(), s.action) == avail.end()) fail("action was not available");
        auto dist = successor_distribution(scenario, s.state, s.action);
        bool possible = std::any_of(dist.begin(), dist.end(),
                                    [&](const auto& d) { return d.second.next_state == s.next_state; });
        if (!possible) fail("next state " + scenario.describe(s.next_state) + " is not a possible outcome");
        ValueVector r = alignment_vector(scenario, s.state, s.action);
        if (s.alignment != r)
            fail("logged alignment " + format_vector(s.alignment) + " differs from recomputed " + format_vector(r));

        StepScore step;
        step.index = idx;
        step.alignment = r;
        for (std::size_t d = 0; d < dims; ++d) {
            if (exact) {
                out.exact[d].add(r[d]);
                out.cumulative[d] = out.exact[d].value();
            } else {
                out.cumulative[d] += discount * r[d];
            }
        }
        step.cumulative = out.cumulative;
        out.steps.push_back(std::move(step));
        discount *= gamma;
    }
    return out;
}

std::string_view to_string(DominanceStatus status) {
    switch (status) {
        case DominanceStatus::on_front: return "on-front";
        case DominanceStatus::dominated: return "dominated";
        case DominanceStatus::incomparable: return "incomparable";
    }
    return "?";
}

FrontComparison compare_to_front(const ValueVector& cumulative, const ParetoSet& front, double tau) {
    if (front.empty()) throw ContractViolation("compare_to_front: empty front");
    for (const auto& m : front)
        if (m.size() != cumulative.size()) throw ContractViolation("compare_to_front: dimension mismatch");
    FrontComparison out;
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < front.size(); ++i) {
        double d = linf_distance(front[i], cumulative);
        if (d < best || (d == best && lex_greater(front[i], front[nearest]))) {
            best = d;
            nearest = i;
        }
    }
    out.nearest = front[nearest];
    out.nearest_distance = best;
    if (best <= tau) {
        out.status = DominanceStatus::on_front;
        return out;
    }
    for (const auto& m : front) {
        if (!weakly_dominates(m, cumulative, tau)) continue;
        ValueVector regret(m.size());
        for (std::size_t d = 0; d < m.size(); ++d) regret[d] = std::max(0.0, m[d] - cumulative[d]);
        out.regrets.push_back({m, std::move(regret)});
    }
    out.status = out.regrets.empty() ? DominanceStatus::incomparable : DominanceStatus::dominated;
    return out;
}

namespace {

std::string number_text(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << (x == 0.0 ? 0.0 : x);
    return os.str();
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += i + 1 == names.size() ? " and " : ", ";
        out += names[i];
    }
    return out;
}

std::vector<Remark> build_remarks(const Scenario& scenario, const Trajectory& t) {
    std::vector<Remark> out;
    for (const auto& s : t.steps) {
        Remark r;
        r.step = s.index;
        r.action = s.action;
        std::vector<std::string> names;
        std::vector<std::string> scores;
        for (std::size_t v = 0; v < s.alignment.size(); ++v) {
            if (s.alignment[v] > kRemarkThreshold) continue;
            r.values.push_back(static_cast<int>(v));
            names.push_back(scenario.values[v].name);
            scores.push_back(scenario.values[v].name + " " + number_text(s.alignment[v]));
        }
        if (r.values.empty()) continue;
        r.text = "Step " + std::to_string(s.index + 1) + ": " + scenario.actions[static_cast<std::size_t>(s.action)].name +
                 " in " + scenario.describe(s.state) + " worked against " + join_names(names) + " (" +
                 join_names(scores) + ").";
        out.push_back(std::move(r));
    }
    return out;
}

std::size_t argmax_by(const ParetoSet& front, const std::function<double(const ValueVector&)>& key) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < front.size(); ++i) {
        double a = key(front[i]);
        double b = key(front[best]);
        if (a > b || (a == b && lex_greater(front[i], front[best]))) best = i;
    }
    return best;
}

}  // namespace

AssessmentReport build_report(const Scenario& scenario, const Trajectory& trajectory, const SolutionFront& solution,
                              const std::optional<ValueVector>& weights) {
    std::string hash = scenario_hash(scenario);
    if (solution.scenario_hash != hash) throw ContractViolation("front was solved for a different scenario");
    if (weights && weights->size() != scenario.values.size())
        throw ContractViolation("expected " + std::to_string(scenario.values.size()) + " weights");

    AssessmentReport rep;
    rep.scenario_name = scenario.name;
    rep.scenario_hash = hash;
    rep.gamma = solution.config.gamma;
    rep.horizon = solution.config.horizon;
    rep.weights = weights;
    rep.trajectory = trajectory;
    rep.score = score_trajectory(scenario, trajectory, rep.gamma);
    rep.outcome = trajectory.outcome(scenario);
    rep.truncated_caveat = rep.outcome == EpisodeOutcome::truncated;
    rep.start = trajectory.steps.empty() ? scenario.initial : trajectory.steps.front().state;
    rep.front = solution.front(rep.start);
    rep.comparison = compare_to_front(rep.score.cumulative, rep.front, solution.config.tau);

    std::vector<std::pair<std::string, std::size_t>> picks;
    if (weights) {
        const auto& w = *weights;
        auto dot = [&](const ValueVector& v) {
            double s = 0.0;
            for (std::size_t d = 0; d < v.size(); ++d) s += w[d] * v[d];
            return s;
        };
        picks.emplace_back("preferred", argmax_by(rep.front, dot));
    } else {
        for (std::size_t d = 0; d < scenario.values.size(); ++d)
            picks.emplace_back("max " + scenario.values[d].name,
                               argmax_by(rep.front, [d](const ValueVector& v) { return v[d]; }));
        auto nearest = std::find(rep.front.begin(), rep.front.end(), rep.comparison.nearest) - rep.front.begin();
        picks.emplace_back("nearest", static_cast<std::size_t>(nearest));
    }
    std::vector<std::size_t> seen;
    for (auto& [label, idx] : picks) {
        auto it = std::find(seen.begin(), seen.end(), idx);
        if (it != seen.end()) {
            rep.recommendations[static_cast<std::size_t>(it - seen.begin())].label += ", " + label;
            continue;
        }
        seen.push_back(idx);
        rep.recommendations.push_back({label, rep.front[idx], extract_policy(solution, rep.start, rep.front[idx])});
    }
    rep.remarks = build_remarks(scenario, trajectory);
    return rep;
}

namespace {

ordered_json named_vector(const Scenario& scenario, const ValueVector& v) {
    ordered_json out = ordered_json::object();
    for (std::size_t d = 0; d < v.size(); ++d) out[scenario.values[d].name] = v[d] == 0.0 ? 0.0 : v[d];
    return out;
}

}  // namespace

ordered_json report_json(const Scenario& scenario, const AssessmentReport& rep) {
    ordered_json out;
    out["format_version"] = 1;
    out["scenario"] = {{"name", rep.scenario_name}, {"hash", rep.scenario_hash}};
    ordered_json values = ordered_json::array();
    for (const auto& v : scenario.values) values.push_back(v.name);
    out["values"] = std::move(values);
    out["gamma"] = rep.gamma;
    out["horizon"] = rep.horizon;
    out["seed"] = rep.trajectory.seed;
    out["outcome"] = std::string(to_string(rep.outcome));
    out["cumulative"] = named_vector(scenario, rep.score.cumulative);

    ordered_json steps = ordered_json::array();
    for (std::size_t i = 0; i < rep.trajectory.steps.size(); ++i) {
        const auto& s = rep.trajectory.steps[i];
        steps.push_back({{"index", s.index},
                         {"state", state_json(scenario.variables, s.state)},
                         {"action", scenario.actions[static_cast<std::size_t>(s.action)].name},
                         {"alignment", named_vector(scenario, rep.score.steps[i].alignment)},
                         {"cumulative", named_vector(scenario, rep.score.steps[i].cumulative)},
                         {"next_state", state_json(scenario.variables, s.next_state)}});
    }
    out["steps"] = std::move(steps);

    ordered_json dom;
    dom["status"] = std::string(to_string(rep.comparison.status));
    dom["truncated_caveat"] = rep.truncated_caveat;
    dom["nearest"] = vector_json(rep.comparison.nearest);
    dom["nearest_distance"] = rep.comparison.nearest_distance;
    ordered_json regrets = ordered_json::array();
    for (const auto& r : rep.comparison.regrets)
        regrets.push_back({{"member", vector_json(r.member)}, {"regret", named_vector(scenario, r.regret)}});
    dom["regrets"] = std::move(regrets);
    out["dominance"] = std::move(dom);

    out["start"] = state_json(scenario.variables, rep.start);
    ordered_json front = ordered_json::array();
    for (const auto& v : rep.front) front.push_back(vector_json(v));
    out["front"] = std::move(front);
    if (rep.weights) out["weights"] = vector_json(*rep.weights);

    ordered_json recs = ordered_json::array();
    for (const auto& r : rep.recommendations) {
        ordered_json path = ordered_json::array();
        for (const auto& [state, action] : r.trace.path())
            path.push_back({{"state", state_json(scenario.variables, state)},
                            {"action", scenario.actions[static_cast<std::size_t>(action)].name},
                            {"alignment", named_vector(scenario, alignment_vector(scenario, state, action))}});
        recs.push_back({{"label", r.label}, {"vector", vector_json(r.vector)}, {"steps", std::move(path)}});
    }
    out["recommendations"] = std::move(recs);

    ordered_json remarks = ordered_json::array();
    for (const auto& r : rep.remarks) {
        ordered_json names = ordered_json::array();
        for (int v : r.values) names.push_back(scenario.values[static_cast<std::size_t>(v)].name);
        remarks.push_back({{"step", r.step},
                           {"action", scenario.actions[static_cast<std::size_t>(r.action)].name},
                           {"values", std::move(names)},
                           {"text", r.text}});
    }
    out["remarks"] = std::move(remarks);
    return out;
}

std::string report_text(const Scenario& scenario, const AssessmentReport& rep) {
    std::ostringstream os;
    os << "Scenario " << rep.scenario_name << ", outcome " << to_string(rep.outcome) << ", "
       << rep.trajectory.steps.size() << " steps\n\n";
    os << std::left << std::setw(5) << "#" << std::setw(28) << "action";
    for (const auto& v : scenario.values) os << std::right << std::setw(18) << v.name;
    os << "\n";
    for (std::size_t i = 0; i < rep.trajectory.steps.size(); ++i) {
        const auto& s = rep.trajectory.steps[i];
        os << std::left << std::setw(5) << (i + 1) << std::setw(28)
           << scenario.actions[static_cast<std::size_t>(s.action)].name;
        for (double x : rep.score.steps[i].alignment) os << std::right << std::setw(18) << number_text(x);
        os << "\n";
    }
    os << std::left << std::setw(33) << "cumulative";
    for (double x : rep.score.cumulative) os << std::right << std::setw(18) << number_text(x);
    os << "\n\nDominance: " << to_string(rep.comparison.status);
    if (rep.truncated_caveat) os << " (episode truncated before a terminal state)";
    os << "\nNearest front vector: " << format_vector(rep.comparison.nearest) << "\n";
    for (const auto& r : rep.comparison.regrets)
        os << "  regret against " << format_vector(r.member) << ": " << format_vector(r.regret) << "\n";
    os << "\nRecommended alternatives:\n";
    for (const auto& r : rep.recommendations) {
        os << "  [" << r.label << "] " << format_vector(r.vector) << ":";
        for (const auto& [state, action] : r.trace.path())
            os << " " << scenario.actions[static_cast<std::size_t>(action)].name;
        os << "\n";
    }
    if (!rep.remarks.empty()) {
        os << "\nRemarks:\n";
        for (const auto& r : rep.remarks) os << "  " << r.text << "\n";
    }
    return os.str();
}

}  // namespace valence
