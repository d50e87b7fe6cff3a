#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "valence/diagnostics.hpp"
#include "valence/solver.hpp"

namespace valence {

inline constexpr int kFrontFormatVersion = 1;

/// `*.front.json`: every layer with provenance, so a reloaded solution
/// supports extract_policy exactly like a fresh one.
std::string serialize_front(const SolutionFront& solution);
ParseResult<SolutionFront> parse_front(std::string_view text);

/// Front at `start` with per-value maxima and solver status, as served by
/// the front endpoint and printed by `valence solve --format json`.
nlohmann::ordered_json front_summary(const SolutionFront& solution, const StateVector& start);

/// Vector <-> JSON array helpers shared by the report writers.
nlohmann::ordered_json vector_json(const ValueVector& v);
nlohmann::ordered_json state_json(const std::vector<VariableDef>& variables, const StateVector& state);

}  // namespace valence
