#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "valence/model.hpp"
#include "valence/pareto.hpp"
#include "valence/solver.hpp"
#include "valence/trajectory.hpp"

namespace valence {

/// Exact sum of doubles on a 2^-100 fixed-point grid. Scores are clamped to
/// [-1, 1], so any double score is represented exactly unless it has bits
/// below 2^-100 (those round to nearest). Conversion back rounds once.
class FixedSum {
public:
    __extension__ typedef __int128 wide;

    FixedSum() = default;
    explicit FixedSum(double x) { add(x); }

    void add(double x);
    [[nodiscard]] double value() const;
    [[nodiscard]] wide raw() const { return raw_; }

    FixedSum& operator+=(const FixedSum& o) {
        raw_ += o.raw_;
        return *this;
    }
    friend FixedSum operator+(FixedSum a, const FixedSum& b) { return a += b; }
    friend bool operator==(const FixedSum&, const FixedSum&) = default;

private:
    wide raw_ = 0;
};

/// Recomputation found a log that momdp-core would not have produced.
/// `step` is the 0-based step index, or -1 for a scenario hash mismatch.
class IntegrityError : public ModelError {
public:
    IntegrityError(int step, const std::string& message) : ModelError(message), step_(step) {}
    [[nodiscard]] int step() const { return step_; }

private:
    int step_;
};

struct StepScore {
    int index = 0;
    ValueVector alignment;   // recomputed r(s_i, a_i)
    ValueVector cumulative;  // discounted sum through this step
};

struct TrajectoryScore {
    ValueVector cumulative;
    std::vector<StepScore> steps;
    /// Per-value exact accumulators; filled only when gamma == 1.
    std::vector<FixedSum> exact;
};

/// Sum of gamma^i * r(s_i, a_i). Verifies the scenario hash, the chaining
/// of steps, that each action was available, that each next_state is a
/// possible outcome, and that logged alignments equal recomputed ones.
TrajectoryScore score_trajectory(const Scenario& scenario, const Trajectory& trajectory, double gamma);

enum class DominanceStatus { on_front, dominated, incomparable };

std::string_view to_string(DominanceStatus status);

struct FrontComparison {
    DominanceStatus status = DominanceStatus::incomparable;
    struct Regret {
        ValueVector member;
        ValueVector regret;  // member - cumulative, >= 0
    };
    std::vector<Regret> regrets;  // one per dominating member
    ValueVector nearest;
    double nearest_distance = 0.0;
};

/// Membership within `tau` (L-infinity) takes precedence over dominance.
/// Nearest is the L-infinity argmin, ties to the lexicographically largest.
/// Empty front or mismatched dimensions throw ContractViolation.
FrontComparison compare_to_front(const ValueVector& cumulative, const ParetoSet& front, double tau = 1e-9);

struct Recommendation {
    std::string label;  // "max <Value>", "nearest", "preferred"
    ValueVector vector;
    PolicyTrace trace;
};

struct Remark {
    int step = 0;
    int action = -1;
    std::vector<int> values;  // value indices scoring <= -0.5
    std::string text;
};

struct AssessmentReport {
    std::string scenario_name;
    std::string scenario_hash;
    double gamma = 1.0;
    int horizon = 0;
    EpisodeOutcome outcome = EpisodeOutcome::truncated;
    bool truncated_caveat = false;
    std::optional<ValueVector> weights;
    Trajectory trajectory;
    TrajectoryScore score;
    StateVector start;
    ParetoSet front;
    FrontComparison comparison;
    std::vector<Recommendation> recommendations;
    std::vector<Remark> remarks;
};

inline constexpr double kRemarkThreshold = -0.5;

/// Scores the trajectory, compares it with the front at its first state and
/// picks alternatives: with weights the front vector maximising w.v, else
/// each per-value maximiser plus the nearest vector (duplicates removed).
AssessmentReport build_report(const Scenario& scenario, const Trajectory& trajectory, const SolutionFront& solution,
                              const std::optional<ValueVector>& weights = std::nullopt);

/// `*.report.json` body.
nlohmann::ordered_json report_json(const Scenario& scenario, const AssessmentReport& report);

/// Plain-text debrief table for terminals.
std::string report_text(const Scenario& scenario, const AssessmentReport& report);

}  // namespace valence
