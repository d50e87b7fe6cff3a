#include "valence/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace valence {

std::string_view to_string(TerminalLabel label) {
    return label == TerminalLabel::success ? "success" : "failure";
}

std::size_t Scenario::state_count() const {
    std::size_t n = 1;
    for (const auto& v : variables) n *= static_cast<std::size_t>(v.size());
    return n;
}

std::size_t Scenario::index_of(const StateVector& state) const {
    std::size_t index = 0;
    for (std::size_t i = 0; i < variables.size(); ++i)
        index = index * static_cast<std::size_t>(variables[i].size()) + static_cast<std::size_t>(state[i]);
    return index;
}

StateVector Scenario::state_at(std::size_t index) const {
    std::vector<int> levels(variables.size());
    for (std::size_t i = variables.size(); i-- > 0;) {
        auto n = static_cast<std::size_t>(variables[i].size());
        levels[i] = static_cast<int>(index % n);
        index /= n;
    }
    return StateVector(std::move(levels));
}

int Scenario::find_variable(std::string_view n) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i].name == n) return static_cast<int>(i);
    return -1;
}

int Scenario::find_action(std::string_view n) const {
    for (std::size_t i = 0; i < actions.size(); ++i)
        if (actions[i].name == n) return static_cast<int>(i);
    return -1;
}

int Scenario::find_value(std::string_view n) const {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i].name == n) return static_cast<int>(i);
    return -1;
}

int Scenario::action_id(std::string_view n) const {
    int id = find_action(n);
    if (id < 0) throw ModelError("unknown action '" + std::string(n) + "'");
    return id;
}

int Scenario::value_id(std::string_view n) const {
    int id = find_value(n);
    if (id < 0) throw ModelError("unknown value '" + std::string(n) + "'");
    return id;
}

bool Scenario::well_formed(const StateVector& state) const {
    if (state.size() != variables.size()) return false;
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (state[i] < 0 || state[i] >= variables[i].size()) return false;
    return true;
}

std::string Scenario::describe(const StateVector& state) const {
    std::string out = "(";
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (i) out += ", ";
        out += variables[i].levels.at(static_cast<std::size_t>(state[i]));
    }
    return out + ")";
}

std::vector<StateVector> enumerate_states(const Scenario& scenario) {
    std::size_t n = scenario.state_count();
    std::vector<StateVector> states;
    states.reserve(n);
    for (std::size_t i = 0; i < n; ++i) states.push_back(scenario.state_at(i));
    return states;
}

std::optional<TerminalLabel> is_terminal(const Scenario& scenario, const StateVector& state) {
    bool success = false;
    for (const auto& t : scenario.terminals) {
        if (!t.condition.eval_bool(state)) continue;
        if (t.label == TerminalLabel::failure) return TerminalLabel::failure;
        success = true;
    }
    if (success) return TerminalLabel::success;
    return std::nullopt;
}

namespace {

bool applicable(const ActionDef& action, const StateVector& state) {
    return !action.applicable || action.applicable->eval_bool(state);
}

void require_steppable(const Scenario& scenario, const StateVector& state, int action) {
    if (!scenario.well_formed(state)) throw ContractViolation("state does not belong to scenario");
    if (action < 0 || static_cast<std::size_t>(action) >= scenario.actions.size())
        throw ContractViolation("action index out of range");
    if (is_terminal(scenario, state)) throw ContractViolation("cannot act in a terminal state");
    if (!applicable(scenario.actions[static_cast<std::size_t>(action)], state))
        throw ContractViolation("action '" + scenario.actions[static_cast<std::size_t>(action)].name +
                                "' is not applicable in " + scenario.describe(state));
}

}  // namespace

std::vector<int> available_actions(const Scenario& scenario, const StateVector& state) {
    if (is_terminal(scenario, state)) throw ContractViolation("no actions are available in a terminal state");
    std::vector<int> out;
    for (std::size_t i = 0; i < scenario.actions.size(); ++i)
        if (applicable(scenario.actions[i], state)) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<std::string> available_action_names(const Scenario& scenario, const StateVector& state) {
    std::vector<std::string> out;
    for (int a : available_actions(scenario, state)) out.push_back(scenario.actions[static_cast<std::size_t>(a)].name);
    return out;
}

double alignment(const Scenario& scenario, int value, const StateVector& state, int action) {
    if (value < 0 || static_cast<std::size_t>(value) >= scenario.values.size())
        throw ModelError("value index out of range");
    if (action < 0 || static_cast<std::size_t>(action) >= scenario.actions.size())
        throw ModelError("action index out of range");
    const auto& rules = scenario.values[static_cast<std::size_t>(value)].rules[static_cast<std::size_t>(action)];
    double score = rules.default_score;
    for (const auto& c : rules.cases) {
        if (!c.guard || c.guard->eval_bool(state)) {
            score = c.score.eval_number(state);
            break;
        }
    }
    if (std::isnan(score)) throw EvalError("alignment score is not a number", 0);
    return std::clamp(score, -1.0, 1.0);
}

double alignment(const Scenario& scenario, std::string_view value, const StateVector& state,
                 std::string_view action) {
    return alignment(scenario, scenario.value_id(value), state, scenario.action_id(action));
}

ValueVector alignment_vector(const Scenario& scenario, const StateVector& state, int action) {
    ValueVector out(scenario.values.size());
    for (std::size_t v = 0; v < out.size(); ++v) out[v] = alignment(scenario, static_cast<int>(v), state, action);
    return out;
}

StateVector apply_outcome(const Scenario& scenario, const StateVector& state, const Outcome& outcome) {
    StateVector next = state;
    for (const auto& rule : outcome.effects) {
        if (rule.guard && !rule.guard->eval_bool(state)) continue;
        for (const auto& a : rule.assignments) {
            auto var = static_cast<std::size_t>(a.variable);
            int top = scenario.variables[var].size() - 1;
            switch (a.kind) {
                case Assignment::Kind::set: next[var] = a.amount; break;
                case Assignment::Kind::increment: next[var] = std::min(top, next[var] + a.amount); break;
                case Assignment::Kind::decrement: next[var] = std::max(0, next[var] - a.amount); break;
            }
        }
    }
    return next;
}

namespace {

TransitionOutcome make_outcome(const Scenario& scenario, const StateVector& state, int action,
                               const Outcome& outcome) {
    TransitionOutcome t;
    t.next_state = apply_outcome(scenario, state, outcome);
    t.alignment = alignment_vector(scenario, state, action);
    t.terminal = is_terminal(scenario, t.next_state);
    return t;
}

// Uniform draw in [0, bound) without modulo bias.
std::uint64_t draw_below(RandomSource& random, std::uint64_t bound) {
    constexpr auto max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - (max % bound);
    std::uint64_t x;
    do {
        x = random();
    } while (x >= limit);
    return x % bound;
}

}  // namespace

TransitionOutcome step(const Scenario& scenario, const StateVector& state, int action, RandomSource& random) {
    require_steppable(scenario, state, action);
    const auto& outcomes = scenario.actions[static_cast<std::size_t>(action)].outcomes;
    if (outcomes.size() == 1) return make_outcome(scenario, state, action, outcomes.front());

    std::uint64_t common = 1;
    for (const auto& o : outcomes) common = std::lcm(common, static_cast<std::uint64_t>(o.probability.den()));
    std::uint64_t pick = draw_below(random, common);
    std::uint64_t cumulative = 0;
    for (const auto& o : outcomes) {
        cumulative += static_cast<std::uint64_t>(o.probability.num()) * (common / static_cast<std::uint64_t>(o.probability.den()));
        if (pick < cumulative) return make_outcome(scenario, state, action, o);
    }
    return make_outcome(scenario, state, action, outcomes.back());
}

TransitionOutcome step(const Scenario& scenario, const StateVector& state, std::string_view action,
                       RandomSource& random) {
    int id = scenario.find_action(action);
    if (id < 0) throw ContractViolation("unknown action '" + std::string(action) + "'");
    return step(scenario, state, id, random);
}

std::vector<std::pair<Rational, TransitionOutcome>> successor_distribution(const Scenario& scenario,
                                                                           const StateVector& state, int action) {
    require_steppable(scenario, state, action);
    std::vector<std::pair<Rational, TransitionOutcome>> out;
    for (const auto& o : scenario.actions[static_cast<std::size_t>(action)].outcomes)
        out.emplace_back(o.probability, make_outcome(scenario, state, action, o));
    return out;
}

}  // namespace valence
