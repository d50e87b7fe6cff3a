#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "valence/diagnostics.hpp"
#include "valence/model.hpp"

namespace valence {

struct StepRecord {
    int index = 0;
    StateVector state;
    int action = -1;
    ValueVector alignment;
    StateVector next_state;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

enum class EpisodeOutcome { success, failure, truncated };

std::string_view to_string(EpisodeOutcome outcome);
std::optional<EpisodeOutcome> episode_outcome_from(std::string_view text);

struct Trajectory {
    std::string scenario_name;
    std::string scenario_hash;
    std::uint64_t seed = 0;
    double gamma = 1.0;
    int horizon = 50;
    std::vector<StepRecord> steps;

    /// Terminal label of the last next_state, truncated otherwise.
    [[nodiscard]] EpisodeOutcome outcome(const Scenario& scenario) const;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

inline constexpr int kTrajectoryFormatVersion = 1;

/// `*.traj.jsonl`: a header line, one line per step, an outcome line.
std::string serialize_trajectory(const Scenario& scenario, const Trajectory& trajectory);

/// Level, action and value names resolve against `scenario`; the content
/// hash is carried through unchecked (score_trajectory checks it).
ParseResult<Trajectory> parse_trajectory(const Scenario& scenario, std::string_view text);

/// One live episode: owns the random stream and the growing trajectory.
class Episode {
public:
    Episode(const Scenario& scenario, std::uint64_t seed, int horizon, double gamma = 1.0);

    /// Applies `action`; throws ContractViolation when finished or when the
    /// action is not available.
    const StepRecord& apply(int action);
    const StepRecord& apply(std::string_view action);

    [[nodiscard]] bool finished() const;
    [[nodiscard]] std::optional<EpisodeOutcome> outcome() const;
    [[nodiscard]] const StateVector& state() const { return state_; }
    [[nodiscard]] const Trajectory& trajectory() const { return trajectory_; }
    [[nodiscard]] const Scenario& scenario() const { return *scenario_; }

private:
    const Scenario* scenario_;
    RandomSource random_;
    StateVector state_;
    Trajectory trajectory_;
};

/// Raised by play_scripted: `step` is the 0-based script position.
class ScriptError : public std::runtime_error {
public:
    ScriptError(int step, const std::string& message) : std::runtime_error(message), step_(step) {}
    [[nodiscard]] int step() const { return step_; }

private:
    int step_;
};

/// Replays an action list from the initial state. An unknown or unavailable
/// action, or any action after the episode has finished, raises ScriptError.
Trajectory play_scripted(const Scenario& scenario, const std::vector<std::string>& actions, std::uint64_t seed,
                         int horizon, double gamma = 1.0);

}  // namespace valence
