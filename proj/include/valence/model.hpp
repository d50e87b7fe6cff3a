#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "valence/expr.hpp"
#include "valence/rational.hpp"
#include "valence/state.hpp"

namespace valence {

/// One score per organisational value, in scenario value order.
using ValueVector = std::vector<double>;

/// Deterministic random stream owned by a caller (a session, a CLI run).
using RandomSource = std::mt19937_64;

/// Unknown value or action names and similar lookups against a scenario.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (stepping a terminal state,
/// choosing an inapplicable action, mixing vector dimensions).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class TerminalLabel { success, failure };

std::string_view to_string(TerminalLabel label);

struct Assignment {
    enum class Kind { set, increment, decrement };
    int variable = -1;
    Kind kind = Kind::set;
    int amount = 0;  // target level for set, step size otherwise

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Guarded list of assignments. The guard reads the pre-transition state;
/// assignments update the working state in order and clamp to the domain.
struct EffectRule {
    std::optional<Expr> guard;  // absent = always
    std::vector<Assignment> assignments;

    friend bool operator==(const EffectRule&, const EffectRule&) = default;
};

struct Outcome {
    Rational probability{1};
    std::vector<EffectRule> effects;

    friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct ActionDef {
    std::string name;
    std::optional<Expr> applicable;  // absent = always
    std::vector<Outcome> outcomes;

    friend bool operator==(const ActionDef&, const ActionDef&) = default;
};

struct TerminalSpec {
    Expr condition;
    TerminalLabel label = TerminalLabel::success;

    friend bool operator==(const TerminalSpec&, const TerminalSpec&) = default;
};

struct AlignmentCase {
    std::optional<Expr> guard;  // absent = always
    Expr score;

    friend bool operator==(const AlignmentCase&, const AlignmentCase&) = default;
};

/// Scoring rules of one value for one action: first matching case wins,
/// otherwise `default_score`. Results clamp to [-1, +1].
struct AlignmentRuleSet {
    std::vector<AlignmentCase> cases;
    double default_score = 0.0;

    friend bool operator==(const AlignmentRuleSet&, const AlignmentRuleSet&) = default;
};

struct ValueDef {
    std::string name;
    std::vector<AlignmentRuleSet> rules;  // indexed by action

    friend bool operator==(const ValueDef&, const ValueDef&) = default;
};

/// The labelled transition system plus value alignment functions. Treated
/// as immutable once built; share it freely across threads.
struct Scenario {
    std::string name;
    std::string description;
    std::vector<VariableDef> variables;
    StateVector initial;
    std::vector<ActionDef> actions;
    std::vector<ValueDef> values;
    std::vector<TerminalSpec> terminals;

    [[nodiscard]] std::size_t state_count() const;
    [[nodiscard]] std::size_t index_of(const StateVector& state) const;
    [[nodiscard]] StateVector state_at(std::size_t index) const;

    [[nodiscard]] int find_variable(std::string_view name) const;
    [[nodiscard]] int find_action(std::string_view name) const;
    [[nodiscard]] int find_value(std::string_view name) const;

    /// Same as find_action but throws ModelError on a miss.
    [[nodiscard]] int action_id(std::string_view name) const;
    [[nodiscard]] int value_id(std::string_view name) const;

    [[nodiscard]] bool well_formed(const StateVector& state) const;

    /// "(Moderate, 4, NotReady, Poor, Perfect)"
    [[nodiscard]] std::string describe(const StateVector& state) const;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct TransitionOutcome {
    StateVector next_state;
    ValueVector alignment;
    std::optional<TerminalLabel> terminal;

    friend bool operator==(const TransitionOutcome&, const TransitionOutcome&) = default;
};

/// Cartesian product of all variable domains, first variable most
/// significant. Position i holds `scenario.state_at(i)`.
std::vector<StateVector> enumerate_states(const Scenario& scenario);

/// Success and failure conditions checked together; failure wins a tie.
std::optional<TerminalLabel> is_terminal(const Scenario& scenario, const StateVector& state);

/// Indices of applicable actions in declaration order.
std::vector<int> available_actions(const Scenario& scenario, const StateVector& state);
std::vector<std::string> available_action_names(const Scenario& scenario, const StateVector& state);

double alignment(const Scenario& scenario, int value, const StateVector& state, int action);
double alignment(const Scenario& scenario, std::string_view value, const StateVector& state,
                 std::string_view action);
ValueVector alignment_vector(const Scenario& scenario, const StateVector& state, int action);

/// Samples one outcome from `random` (consumed only when the action has more
/// than one outcome) and applies it.
TransitionOutcome step(const Scenario& scenario, const StateVector& state, int action, RandomSource& random);
TransitionOutcome step(const Scenario& scenario, const StateVector& state, std::string_view action,
                       RandomSource& random);

/// Every outcome with its exact probability, in declaration order.
std::vector<std::pair<Rational, TransitionOutcome>> successor_distribution(const Scenario& scenario,
                                                                           const StateVector& state, int action);

/// Applies one declared outcome of `action` to `state` without checks.
StateVector apply_outcome(const Scenario& scenario, const StateVector& state, const Outcome& outcome);

}  // namespace valence
