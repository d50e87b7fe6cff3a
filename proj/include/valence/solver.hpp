#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "valence/model.hpp"
#include "valence/pareto.hpp"

namespace valence {

struct SolveConfig {
    double gamma = 1.0;
    int horizon = 50;              // sweeps; 0 = unbounded (needs gamma < 1)
    double epsilon = 1e-9;         // convergence, Hausdorff under L-infinity
    double tau = 1e-9;             // dedup tolerance in pruning and lookups
    std::size_t max_vectors = 0;   // per state; 0 = unlimited
    int max_sweeps = 2000;         // hard stop when horizon is unbounded

    /// Empty when consistent, otherwise the reason.
    [[nodiscard]] std::string check() const;
};

enum class SolveTermination { converged, horizon, not_converged };

std::string_view to_string(SolveTermination t);

/// Replaces available_actions() during the backup; used to solve a
/// protocol-restricted model. Must return applicable action indices.
using ActionFilter = std::function<std::vector<int>(const StateVector&)>;

/// Per-sweep vector sets with provenance. Layer k holds V_k; an entry of
/// layer k links, per successor state, to an entry index of layer k-1.
/// Layer 0 is all zero vectors.
struct SolutionFront {
    struct Link {
        std::uint32_t state = 0;
        std::uint32_t index = 0;
        double probability = 1.0;
        friend bool operator==(const Link&, const Link&) = default;
    };
    struct Entry {
        ValueVector value;
        int action = -1;  // -1: leaf (terminal, horizon, or dead end)
        std::vector<Link> links;
        friend bool operator==(const Entry&, const Entry&) = default;
    };
    struct Layer {
        std::vector<std::vector<Entry>> states;  // by state index
        friend bool operator==(const Layer&, const Layer&) = default;
    };

    std::string scenario_name;
    std::string scenario_hash;
    std::vector<VariableDef> variables;
    std::vector<std::string> action_names;
    std::vector<std::string> value_names;
    SolveConfig config;
    SolveTermination termination = SolveTermination::horizon;
    bool approximate = false;  // the max_vectors cap discarded members
    double residual = 0.0;     // Hausdorff distance of the last sweep
    std::vector<Layer> layers;

    [[nodiscard]] std::size_t state_count() const;
    [[nodiscard]] std::size_t index_of(const StateVector& state) const;
    [[nodiscard]] StateVector state_at(std::size_t index) const;
    [[nodiscard]] std::size_t sweeps() const { return layers.empty() ? 0 : layers.size() - 1; }

    /// Final-layer entries / vectors at a state.
    [[nodiscard]] const std::vector<Entry>& entries(const StateVector& state) const;
    [[nodiscard]] ParetoSet front(const StateVector& state) const;

    /// "(Moderate, 4, NotReady, Poor, Perfect)"
    [[nodiscard]] std::string describe(const StateVector& state) const;
};

/// Pareto multi-objective value iteration. Terminal states stay at {0};
/// a non-terminal state with no allowed action is a leaf with {0}.
/// Throws ContractViolation when config.check() fails.
SolutionFront pmovi(const Scenario& scenario, const SolveConfig& config, const ActionFilter& filter = {});

/// A policy realising one front vector. Node 0 is the start; each node
/// holds the action taken and its successors with their probabilities.
/// In a deterministic model every node has at most one child.
struct PolicyTrace {
    struct Node {
        StateVector state;
        int action = -1;  // -1: leaf
        ValueVector value;  // the front vector this node realises
        std::vector<std::pair<double, int>> children;
    };
    std::vector<Node> nodes;
    ValueVector target;

    /// Path obtained by always following the most probable child (the only
    /// child in a deterministic model): (state, action) pairs.
    [[nodiscard]] std::vector<std::pair<StateVector, int>> path() const;
};

/// Raised by extract_policy when the target is not a front member.
class FrontLookupError : public ModelError {
public:
    FrontLookupError(const std::string& message, ValueVector nearest)
        : ModelError(message), nearest_(std::move(nearest)) {}
    [[nodiscard]] const ValueVector& nearest() const { return nearest_; }

private:
    ValueVector nearest_;
};

/// Follows provenance from the final-layer entry at `start` matching
/// `target` within tau.
PolicyTrace extract_policy(const SolutionFront& solution, const StateVector& start, const ValueVector& target);

/// Expected discounted return of a trace, recomputed with momdp-core.
ValueVector trace_return(const Scenario& scenario, const PolicyTrace& trace, double gamma);

/// "(1, 0)" with shortest round-trip number formatting.
std::string format_vector(const ValueVector& v);

}  // namespace valence
