#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "valence/model.hpp"
#include "valence/pareto.hpp"

namespace testsupport {

using valence::ParetoSet;
using valence::Scenario;
using valence::StateVector;
using valence::ValueVector;

std::string fixture_path(const std::string& name);
std::string asset_path(const std::string& name);

/// Built-in scenario with occupancy {0, 1, 2}, starting at occupancy 2.
const Scenario& reduced_firefight();
const Scenario& chain_scenario();

struct RandomScenarioOptions {
    int max_states = 200;
    int max_actions = 4;
    int min_values = 2;
    int max_values = 3;
    bool allow_stochastic = true;
    bool allow_applicability = true;
};

/// Random scenario document text; always parses without errors.
std::string random_scenario_document(std::mt19937_64& rng, const RandomScenarioOptions& options = {});
Scenario random_scenario(std::mt19937_64& rng, const RandomScenarioOptions& options = {});

bool is_deterministic(const Scenario& scenario);

/// Random permissive or restrictive protocol over the scenario's actions,
/// with guards comparing variables to level indices.
std::string random_protocol_document(std::mt19937_64& rng, const Scenario& scenario);

// ---- oracles (no shared code with the solver or the pareto module) ----

/// Non-dominated filter: near-duplicates (every coordinate within tol) keep
/// the lexicographically largest; then v goes when another survivor w has
/// w >= v - tol.
ParetoSet nd_filter(std::vector<ValueVector> vectors, double tol = 1e-12);

/// Deterministic scenarios only: walks every action sequence of length <= H
/// (stopping at terminals and dead ends) and filters the returns.
ParetoSet enumerate_front(const Scenario& scenario, const StateVector& start, int horizon, double gamma);

/// Any scenario: finite-horizon recursion over state-dependent policies.
ParetoSet recursive_front(const Scenario& scenario, const StateVector& start, int horizon, double gamma);

/// True when every member of one set is within tol of a member of the other.
bool same_set(const ParetoSet& a, const ParetoSet& b, double tol = 1e-9);

/// Hand-written firefighting dynamics, independent of the scenario engine.
struct HandState {
    int fire, occupancy, equipment, knowledge, health;
    bool operator==(const HandState&) const = default;
};
enum HandAction { kEvacuate, kContain, kAggressive, kPrepare, kUpdate };
/// 0 = running, 1 = success, 2 = failure.
int hand_terminal(const HandState& s);
HandState hand_step(const HandState& s, int action);
std::array<double, 2> hand_alignment(const HandState& s, int action);
/// Every action sequence of length <= H from `start`, returns filtered.
ParetoSet hand_front(const HandState& start, int horizon);

/// Inclusion-exclusion over subsets; fronts up to ~16 points.
double hypervolume_oracle(const ParetoSet& front, const ValueVector& reference);

/// `n` points with integer-ish coordinates on a 0.25 grid.
std::vector<ValueVector> random_points(std::mt19937_64& rng, std::size_t n, std::size_t dims);

}  // namespace testsupport
