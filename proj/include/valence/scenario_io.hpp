#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "valence/diagnostics.hpp"
#include "valence/model.hpp"

namespace valence {

inline constexpr int kScenarioFormatVersion = 1;

/// Reads a `*.scenario.json` document (see docs/formats.md). All names are
/// resolved and every expression is parsed; problems are reported as located
/// diagnostics instead of exceptions.
ParseResult<Scenario> parse_scenario(std::string_view text);

/// Canonical document text: fixed key order, expressions re-rendered,
/// optional fields omitted when empty. parse(serialize(m)) == m.
std::string serialize_scenario(const Scenario& scenario);

/// "sha256:<hex>" of the canonical serialisation.
std::string scenario_hash(const Scenario& scenario);

/// The residential-fire training scenario: five variables (400 states),
/// five actions, Professionalism and Proximity alignment tables.
const Scenario& builtin_firefight();

/// Canonical document text of builtin_firefight().
std::string_view builtin_firefight_document();

/// Whole-file helpers used by the CLI and service.
std::optional<std::string> read_text_file(const std::string& path);
bool write_text_file(const std::string& path, std::string_view contents);

/// Parses a boolean expression against a scenario's variables. Throws
/// ExprError.
Expr parse_guard(const Scenario& scenario, std::string_view text);

}  // namespace valence
