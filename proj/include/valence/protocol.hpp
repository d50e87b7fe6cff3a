#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "valence/diagnostics.hpp"
#include "valence/model.hpp"
#include "valence/pareto.hpp"
#include "valence/solver.hpp"

namespace valence {

enum class Modality { permit, forbid, oblige };
enum class Stance { permissive, restrictive };

std::string_view to_string(Modality m);
std::string_view to_string(Stance s);

struct DeonticRule {
    std::optional<Expr> guard;  // absent = always
    int action = -1;
    Modality modality = Modality::permit;
    int priority = 0;  // higher wins
    Location location;  // where the rule was read from, if anywhere

    friend bool operator==(const DeonticRule& a, const DeonticRule& b) {
        return a.guard == b.guard && a.action == b.action && a.modality == b.modality && a.priority == b.priority;
    }
};

struct Protocol {
    std::string name;
    std::string description;
    Stance stance = Stance::permissive;
    std::vector<DeonticRule> rules;

    friend bool operator==(const Protocol&, const Protocol&) = default;
};

inline constexpr int kProtocolFormatVersion = 1;

/// `*.protocol.json`, resolved against `scenario`.
ParseResult<Protocol> parse_protocol(const Scenario& scenario, std::string_view text);
std::string serialize_protocol(const Scenario& scenario, const Protocol& protocol);

/// Per applicable action the firing rule with the highest priority decides;
/// equal priorities resolve forbid > oblige > permit. If any applicable
/// action is obliged by a firing rule, only actions whose decision is oblige
/// remain. Otherwise permissive keeps everything not forbidden and
/// restrictive keeps only permitted actions. Terminal states throw
/// ContractViolation.
std::vector<int> allowed_actions(const Scenario& scenario, const Protocol& protocol, const StateVector& state);
std::vector<std::string> allowed_action_names(const Scenario& scenario, const Protocol& protocol,
                                              const StateVector& state);

/// Errors: equal-priority oblige/forbid on one action with a common
/// non-terminal witness state; a state reachable under the protocol with no
/// allowed action. Warnings: rules that never fire in a reachable state.
std::vector<Diagnostic> validate_protocol(const Scenario& scenario, const Protocol& protocol);

struct TransitionSample {
    StateVector state;
    int action = -1;
};

struct ProtocolEvaluation {
    std::string protocol_name;
    ParetoSet front;               // restricted, at the initial state
    ParetoSet unrestricted_front;  // same config, no protocol
    SolveTermination termination = SolveTermination::horizon;
    bool approximate = false;
    ValueVector reference;
    double hypervolume = 0.0;
    double unrestricted_hypervolume = 0.0;
    ValueVector maxima;
    bool covered = true;              // every member dominated-or-equal by an unrestricted one
    std::size_t shared_members = 0;   // members also on the unrestricted front
    std::size_t removed_transitions = 0;  // (state, action) pairs applicable but disallowed
    std::vector<TransitionSample> removed_samples;  // first few, state order
    std::size_t added_transitions = 0;  // always 0: protocols cannot add actions
};

/// Solves with and without the protocol. Without an explicit reference the
/// hypervolume reference is the component-wise minimum of both fronts
/// minus one.
ProtocolEvaluation evaluate_protocol(const Scenario& scenario, const Protocol& protocol, const SolveConfig& config,
                                     const std::optional<ValueVector>& reference = std::nullopt);

struct ProtocolComparison {
    ProtocolEvaluation a;
    ProtocolEvaluation b;
    std::vector<ValueVector> a_dominated_by_b;  // members of a strictly dominated by a member of b
    std::vector<ValueVector> b_dominated_by_a;
};

/// Both evaluations share one reference point: min over both fronts and
/// the unrestricted front, minus one.
ProtocolComparison compare_protocols(const Scenario& scenario, const Protocol& a, const Protocol& b,
                                     const SolveConfig& config);

nlohmann::ordered_json evaluation_json(const Scenario& scenario, const ProtocolEvaluation& e);
nlohmann::ordered_json comparison_json(const Scenario& scenario, const ProtocolComparison& c);
std::string evaluation_text(const Scenario& scenario, const ProtocolEvaluation& e);
std::string comparison_text(const Scenario& scenario, const ProtocolComparison& c);

}  // namespace valence
