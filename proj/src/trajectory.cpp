#include "valence/trajectory.hpp"

#include <sstream>

#include <json.hpp>

#include "valence/front_io.hpp"
#include "valence/scenario_io.hpp"

namespace valence {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(EpisodeOutcome outcome) {
    switch (outcome) {
        case EpisodeOutcome::success: return "success";
        case EpisodeOutcome::failure: return "failure";
        case EpisodeOutcome::truncated: return "truncated";
    }
    return "?";
}

std::optional<EpisodeOutcome> episode_outcome_from(std::string_view text) {
    if (text == "success") return EpisodeOutcome::success;
    if (text == "failure") return EpisodeOutcome::failure;
    if (text == "truncated") return EpisodeOutcome::truncated;
    return std::nullopt;
}

EpisodeOutcome Trajectory::outcome(const Scenario& scenario) const {
    if (steps.empty()) return EpisodeOutcome::truncated;
    auto label = is_terminal(scenario, steps.back().next_state);
    if (!label) return EpisodeOutcome::truncated;
    return *label == TerminalLabel::success ? EpisodeOutcome::success : EpisodeOutcome::failure;
}

std::string serialize_trajectory(const Scenario& scenario, const Trajectory& t) {
    std::string out;
    ordered_json header;
    header["kind"] = "header";
    header["format_version"] = kTrajectoryFormatVersion;
    header["scenario"] = {{"name", t.scenario_name}, {"hash", t.scenario_hash}};
    header["seed"] = t.seed;
    header["gamma"] = t.gamma;
    header["horizon"] = t.horizon;
    out += header.dump() + "\n";
    for (const auto& s : t.steps) {
        ordered_json line;
        line["kind"] = "step";
        line["index"] = s.index;
        line["state"] = state_json(scenario.variables, s.state);
        line["action"] = scenario.actions.at(static_cast<std::size_t>(s.action)).name;
        ordered_json align = ordered_json::object();
        for (std::size_t v = 0; v < scenario.values.size(); ++v)
            align[scenario.values[v].name] = s.alignment.at(v) == 0.0 ? 0.0 : s.alignment[v];
        line["alignment"] = std::move(align);
        line["next_state"] = state_json(scenario.variables, s.next_state);
        out += line.dump() + "\n";
    }
    ordered_json footer;
    footer["kind"] = "outcome";
    footer["outcome"] = std::string(to_string(t.outcome(scenario)));
    footer["steps"] = t.steps.size();
    out += footer.dump() + "\n";
    return out;
}

namespace {

struct LineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

StateVector read_state(const Scenario& scenario, const json& j) {
    if (!j.is_object()) throw LineError("state must be an object");
    StateVector s(std::vector<int>(scenario.variables.size(), 0));
    if (j.size() != scenario.variables.size()) throw LineError("state must name every variable exactly once");
    for (std::size_t i = 0; i < scenario.variables.size(); ++i) {
        const auto& var = scenario.variables[i];
        auto it = j.find(var.name);
        if (it == j.end()) throw LineError("state has no entry for variable '" + var.name + "'");
        if (!it->is_string()) throw LineError("level of '" + var.name + "' must be a string");
        int level = var.level_index(it->get<std::string>());
        if (level < 0) throw LineError("'" + it->get<std::string>() + "' is not a level of '" + var.name + "'");
        s[i] = level;
    }
    return s;
}

}  // namespace

ParseResult<Trajectory> parse_trajectory(const Scenario& scenario, std::string_view text) {
    ParseResult<Trajectory> result;
    Trajectory t;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    bool header = false;
    std::optional<std::string> footer_outcome;
    auto fail = [&](const std::string& code, const std::string& message) {
        result.diagnostics.push_back({Severity::error, code, message, Location{"", line_no, 1}});
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            fail("json-syntax", "line is not valid JSON");
            return result;
        }
        try {
            std::string kind = j.at("kind").get<std::string>();
            if (footer_outcome) throw LineError("content after the outcome line");
            if (kind == "header") {
                if (header) throw LineError("duplicate header line");
                if (j.at("format_version").get<int>() != kTrajectoryFormatVersion)
                    throw LineError("unsupported format_version");
                t.scenario_name = j.at("scenario").at("name").get<std::string>();
                t.scenario_hash = j.at("scenario").at("hash").get<std::string>();
                t.seed = j.at("seed").get<std::uint64_t>();
                t.gamma = j.at("gamma").get<double>();
                t.horizon = j.at("horizon").get<int>();
                header = true;
            } else if (kind == "step") {
                if (!header) throw LineError("step before the header line");
                StepRecord s;
                s.index = j.at("index").get<int>();
                if (s.index != static_cast<int>(t.steps.size()))
                    throw LineError("step index " + std::to_string(s.index) + " out of sequence");
                s.state = read_state(scenario, j.at("state"));
                std::string action = j.at("action").get<std::string>();
                s.action = scenario.find_action(action);
                if (s.action < 0) throw LineError("unknown action '" + action + "'");
                const json& align = j.at("alignment");
                if (!align.is_object() || align.size() != scenario.values.size())
                    throw LineError("alignment must give one score per value");
                for (const auto& v : scenario.values) s.alignment.push_back(align.at(v.name).get<double>());
                s.next_state = read_state(scenario, j.at("next_state"));
                t.steps.push_back(std::move(s));
            } else if (kind == "outcome") {
                if (!header) throw LineError("outcome before the header line");
                footer_outcome = j.at("outcome").get<std::string>();
                if (!episode_outcome_from(*footer_outcome)) throw LineError("unknown outcome '" + *footer_outcome + "'");
            } else {
                throw LineError("unknown line kind '" + kind + "'");
            }
        } catch (const LineError& e) {
            fail("trajectory-format", e.what());
            return result;
        } catch (const json::exception& e) {
            std::string msg = e.what();
            if (auto pos = msg.find("] "); pos != std::string::npos) msg = msg.substr(pos + 2);
            fail("trajectory-format", msg);
            return result;
        }
    }
    if (!header) {
        line_no = 1;
        fail("trajectory-format", "missing header line");
        return result;
    }
    if (footer_outcome && *footer_outcome != to_string(t.outcome(scenario))) {
        fail("trajectory-format", "outcome line says '" + *footer_outcome + "' but the steps end " +
                                      std::string(to_string(t.outcome(scenario))));
        return result;
    }
    result.value = std::move(t);
    return result;
}

Episode::Episode(const Scenario& scenario, std::uint64_t seed, int horizon, double gamma)
    : scenario_(&scenario), random_(seed), state_(scenario.initial) {
    trajectory_.scenario_name = scenario.name;
    trajectory_.scenario_hash = scenario_hash(scenario);
    trajectory_.seed = seed;
    trajectory_.gamma = gamma;
    trajectory_.horizon = horizon;
}

bool Episode::finished() const { return outcome().has_value(); }

std::optional<EpisodeOutcome> Episode::outcome() const {
    if (auto label = is_terminal(*scenario_, state_))
        return *label == TerminalLabel::success ? EpisodeOutcome::success : EpisodeOutcome::failure;
    if (static_cast<int>(trajectory_.steps.size()) >= trajectory_.horizon) return EpisodeOutcome::truncated;
    if (available_actions(*scenario_, state_).empty()) return EpisodeOutcome::truncated;
    return std::nullopt;
}

const StepRecord& Episode::apply(int action) {
    if (finished()) throw ContractViolation("the episode has already finished");
    TransitionOutcome out = step(*scenario_, state_, action, random_);
    StepRecord rec;
    rec.index = static_cast<int>(trajectory_.steps.size());
    rec.state = state_;
    rec.action = action;
    rec.alignment = std::move(out.alignment);
    rec.next_state = out.next_state;
    state_ = std::move(out.next_state);
    trajectory_.steps.push_back(std::move(rec));
    return trajectory_.steps.back();
}

const StepRecord& Episode::apply(std::string_view action) { return apply(scenario_->action_id(action)); }

Trajectory play_scripted(const Scenario& scenario, const std::vector<std::string>& actions, std::uint64_t seed,
                         int horizon, double gamma) {
    Episode ep(scenario, seed, horizon, gamma);
    for (std::size_t i = 0; i < actions.size(); ++i) {
        int step = static_cast<int>(i);
        if (ep.finished())
            throw ScriptError(step, "step " + std::to_string(i) + ": the episode already finished (" +
                                        std::string(to_string(*ep.outcome())) + ")");
        int a = scenario.find_action(actions[i]);
        if (a < 0) throw ScriptError(step, "step " + std::to_string(i) + ": unknown action '" + actions[i] + "'");
        try {
            ep.apply(a);
        } catch (const ContractViolation& e) {
            throw ScriptError(step, "step " + std::to_string(i) + ": " + e.what());
        }
    }
    return ep.trajectory();
}

}  // namespace valence
