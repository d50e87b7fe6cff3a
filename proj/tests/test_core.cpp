#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "support/support.hpp"
#include "valence/expr.hpp"
#include "valence/model.hpp"
#include "valence/rational.hpp"
#include "valence/scenario_io.hpp"

using namespace valence;

namespace {

StateVector ff(const char* fire, const char* occ, const char* equip, const char* know, const char* health) {
    const Scenario& s = builtin_firefight();
    const char* names[] = {fire, occ, equip, know, health};
    StateVector out;
    for (std::size_t i = 0; i < 5; ++i) {
        const auto& levels = s.variables[i].levels;
        auto it = std::find(levels.begin(), levels.end(), names[i]);
        REQUIRE(it != levels.end());
        out.levels.push_back(static_cast<int>(it - levels.begin()));
    }
    return out;
}

Scenario parse_ok(const std::string& text) {
    auto r = parse_scenario(text);
    for (const auto& d : r.diagnostics) MESSAGE(format_diagnostic(d));
    REQUIRE(r.value);
    return *r.value;
}

const char* kTieScenario = R"({
  "format_version": 1, "name": "tie",
  "variables": [{"name": "x", "levels": ["A", "B"]}],
  "initial_state": {"x": "A"},
  "actions": [{"name": "go", "effects": [{"assign": [{"variable": "x", "set": "B"}]}]}],
  "values": [{"name": "V", "rules": {"go": {"default": 0.5}}}],
  "terminals": [{"when": "x == B", "label": "success"}, {"when": "x == B", "label": "failure"}]
})";

const char* kThirds = R"({
  "format_version": 1, "name": "thirds",
  "variables": [{"name": "x", "levels": ["A", "B", "C", "D"]}],
  "initial_state": {"x": "A"},
  "actions": [
    {"name": "roll", "outcomes": [
      {"probability": "1/3", "effects": [{"assign": [{"variable": "x", "set": "B"}]}]},
      {"probability": "1/3", "effects": [{"assign": [{"variable": "x", "set": "C"}]}]},
      {"probability": "1/3", "effects": [{"assign": [{"variable": "x", "set": "D"}]}]}]},
    {"name": "guarded", "applicable": "x > 0", "effects": [{"assign": [{"variable": "x", "increment": 1}]}]}
  ],
  "values": [{"name": "V", "rules": {"roll": {"default": 1}, "guarded": {"default": -1}}}],
  "terminals": [{"when": "x == D", "label": "success"}]
})";

}  // namespace

TEST_SUITE("rational") {
    TEST_CASE("normalises and parses fractions and decimals") {
        CHECK(Rational(2, 4) == Rational(1, 2));
        CHECK(Rational(3, -6) == Rational(-1, 2));
        CHECK(Rational::parse("7/10") == Rational(7, 10));
        CHECK(Rational::parse("0.25") == Rational(1, 4));
        CHECK(Rational::parse("-3/4") == Rational(-3, 4));
        CHECK(Rational::parse("1") == Rational(1));
        CHECK_FALSE(Rational::parse("1/0"));
        CHECK_FALSE(Rational::parse("abc"));
        CHECK_FALSE(Rational::parse(""));
        CHECK(Rational(7, 10).str() == "7/10");
        CHECK(Rational(4, 2).str() == "2");
    }
    TEST_CASE("arithmetic is exact") {
        Rational third(1, 3);
        CHECK(third + third + third == Rational(1));
        CHECK(Rational(7, 10) + Rational(3, 10) == Rational(1));
        CHECK(Rational(1, 2) * Rational(2, 3) == Rational(1, 3));
        CHECK(Rational(1, 3) < Rational(1, 2));
        CHECK(Rational(1, 2) - Rational(1, 3) == Rational(1, 6));
    }
}

TEST_SUITE("expr") {
    const std::vector<VariableDef>& vars() { return builtin_firefight().variables; }

    TEST_CASE("precedence and arithmetic") {
        StateVector s = ff("Moderate", "4", "NotReady", "Poor", "Perfect");
        CHECK(Expr::parse("1 + 2 * 3", vars()).eval_number(s) == 7);
        CHECK(Expr::parse("(1 + 2) * 3", vars()).eval_number(s) == 9);
        CHECK(Expr::parse("-2 - -3", vars()).eval_number(s) == 1);
        CHECK(Expr::parse("1 - 0.5 * (fire / 4) - 0.5 * (1 - knowledge)", vars()).eval_number(s) == 0.25);
        CHECK(Expr::parse("fire == Moderate and occupancy > 3", vars()).eval_bool(s));
        CHECK(Expr::parse("not (fire < Moderate) && !false", vars()).eval_bool(s));
        CHECK(Expr::parse("fire == None or health == Perfect", vars()).eval_bool(s));
        CHECK_FALSE(Expr::parse("equipment == Ready || knowledge == Good", vars()).eval_bool(s));
    }
    TEST_CASE("level literals resolve against the compared variable") {
        StateVector s = ff("High", "0", "Ready", "Good", "SlightlyInjured");
        CHECK(Expr::parse("fire >= Moderate", vars()).eval_bool(s));
        CHECK(Expr::parse("Moderate <= fire", vars()).eval_bool(s));
        CHECK(Expr::parse("health == SlightlyInjured", vars()).eval_bool(s));
        CHECK(Expr::parse("Perfect", vars()).eval_number(s) == 3);  // unique level name
    }
    TEST_CASE("errors carry codes and offsets") {
        try {
            (void)Expr::parse("fire == Lukewarm", vars());
            FAIL("expected ExprError");
        } catch (const ExprError& e) {
            CHECK(e.offset() == 8);
            CHECK_FALSE(e.code().empty());
        }
        CHECK_THROWS_AS((void)Expr::parse("fire +", vars()), ExprError);
        CHECK_THROWS_AS((void)Expr::parse("(fire", vars()), ExprError);
        CHECK_THROWS_AS((void)Expr::parse("fire and true", vars()), ExprError);
        CHECK_THROWS_AS((void)Expr::parse("fire", vars(), ExprType::boolean), ExprError);
        CHECK_THROWS_AS((void)Expr::parse("1 < 2 < 3", vars()), ExprError);
    }
    TEST_CASE("division by zero is an evaluation error") {
        StateVector s = ff("None", "0", "Ready", "Good", "Perfect");
        CHECK_THROWS_AS((void)Expr::parse("1 / fire", vars()).eval_number(s), EvalError);
    }
    TEST_CASE("render round-trips") {
        for (const char* text : {"1 - 0.5 * (fire / 4) - 0.5 * (1 - knowledge)", "fire >= Moderate and not (occupancy == 0)",
                                 "-(fire - 2) * 3", "equipment == NotReady || knowledge == Poor", "1 - (2 - 3)"}) {
            Expr e = Expr::parse(text, vars());
            Expr again = Expr::parse(e.render(vars()), vars());
            CHECK(e == again);
            CHECK(again.render(vars()) == e.render(vars()));
        }
    }
    TEST_CASE("constants") {
        CHECK(Expr::parse("2 * 0.4", vars()).constant_value() == doctest::Approx(0.8));
        CHECK_FALSE(Expr::parse("fire * 2", vars()).constant_value());
    }
}

TEST_SUITE("model") {
    TEST_CASE("state enumeration") {
        const Scenario& s = builtin_firefight();
        auto states = enumerate_states(s);
        CHECK(states.size() == 400);
        CHECK(s.state_count() == 400);
        CHECK(std::set<StateVector>(states.begin(), states.end()).size() == 400);
        CHECK(std::is_sorted(states.begin(), states.end()));
        for (std::size_t i = 0; i < states.size(); ++i) {
            CHECK(s.index_of(states[i]) == i);
            CHECK(s.state_at(i) == states[i]);
        }
    }
    TEST_CASE("degenerate and small products") {
        Scenario one = parse_ok(R"({"format_version": 1, "name": "one",
            "variables": [{"name": "x", "levels": ["Only"]}], "initial_state": {"x": "Only"},
            "actions": [{"name": "a", "effects": []}], "values": [{"name": "V", "rules": {"a": {}}}],
            "terminals": [{"when": "x == Only", "label": "success"}]})");
        CHECK(enumerate_states(one).size() == 1);
        Scenario six = parse_ok(R"({"format_version": 1, "name": "six",
            "variables": [{"name": "x", "levels": ["A", "B"]}, {"name": "y", "levels": ["P", "Q", "R"]}],
            "initial_state": {"x": "A", "y": "P"},
            "actions": [{"name": "a", "effects": []}], "values": [{"name": "V", "rules": {"a": {}}}],
            "terminals": [{"when": "x == B", "label": "success"}]})");
        auto states = enumerate_states(six);
        REQUIRE(states.size() == 6);
        CHECK(states[0] == StateVector{0, 0});
        CHECK(states[1] == StateVector{0, 1});
        CHECK(states[3] == StateVector{1, 0});
        CHECK(states[5] == StateVector{1, 2});
    }
    TEST_CASE("terminal conditions") {
        const Scenario& s = builtin_firefight();
        for (auto equip : {"NotReady", "Ready"})
            for (auto know : {"Poor", "Good"})
                CHECK(is_terminal(s, ff("None", "0", equip, know, "Perfect")) == TerminalLabel::success);
        CHECK(is_terminal(s, ff("Severe", "3", "Ready", "Good", "Incapacitated")) == TerminalLabel::failure);
        CHECK(is_terminal(s, ff("None", "0", "Ready", "Good", "Incapacitated")) == TerminalLabel::failure);
        CHECK_FALSE(is_terminal(s, s.initial));
        CHECK(s.initial == ff("Moderate", "4", "NotReady", "Poor", "Perfect"));
    }
    TEST_CASE("failure wins when both terminal conditions hold") {
        Scenario tie = parse_ok(kTieScenario);
        CHECK(is_terminal(tie, {1}) == TerminalLabel::failure);
    }
    TEST_CASE("available actions") {
        const Scenario& s = builtin_firefight();
        auto names = available_action_names(s, s.initial);
        CHECK(names == std::vector<std::string>{"EvacuateOccupants", "ContainFire", "AggressiveFireSuppression",
                                                "PrepareEquipment", "UpdateKnowledge"});
        for (const auto& st : enumerate_states(s))
            if (!is_terminal(s, st)) CHECK(available_actions(s, st).size() == 5);
        CHECK_THROWS_AS(available_actions(s, ff("None", "0", "Ready", "Good", "Perfect")), ContractViolation);
        Scenario thirds = parse_ok(kThirds);
        CHECK(available_action_names(thirds, {0}) == std::vector<std::string>{"roll"});
        CHECK(available_action_names(thirds, {1}).size() == 2);
    }
    TEST_CASE("alignment values") {
        const Scenario& s = builtin_firefight();
        CHECK(alignment(s, "Professionalism", ff("Moderate", "4", "Ready", "Good", "Perfect"), "ContainFire") == 0.8);
        CHECK(alignment(s, "Proximity", ff("Moderate", "0", "Ready", "Good", "Perfect"), "EvacuateOccupants") == -1);
        CHECK(alignment(s, "Professionalism", ff("Moderate", "2", "NotReady", "Poor", "Perfect"), "EvacuateOccupants") ==
              0.25);
        CHECK_THROWS_AS(alignment(s, "Courage", s.initial, "ContainFire"), ModelError);
        CHECK_THROWS_AS(alignment(s, "Proximity", s.initial, "Dance"), ModelError);
    }
    TEST_CASE("every alignment score is within [-1, 1]") {
        const Scenario& s = builtin_firefight();
        for (const auto& st : enumerate_states(s))
            for (int a = 0; a < 5; ++a)
                for (int v = 0; v < 2; ++v) {
                    double x = alignment(s, v, st, a);
                    CHECK((x >= -1 && x <= 1));
                }
    }
    TEST_CASE("matches hand-written dynamics on every state and action") {
        const Scenario& s = builtin_firefight();
        for (const auto& st : enumerate_states(s)) {
            testsupport::HandState h{st[0], st[1], st[2], st[3], st[4]};
            int label = testsupport::hand_terminal(h);
            auto term = is_terminal(s, st);
            CHECK(label == (!term ? 0 : *term == TerminalLabel::success ? 1 : 2));
            if (term) continue;
            for (int a = 0; a < 5; ++a) {
                auto dist = successor_distribution(s, st, a);
                REQUIRE(dist.size() == 1);
                CHECK(dist[0].first == Rational(1));
                auto hn = testsupport::hand_step(h, a);
                CHECK(dist[0].second.next_state == StateVector{hn.fire, hn.occupancy, hn.equipment, hn.knowledge, hn.health});
                auto r = testsupport::hand_alignment(h, a);
                CHECK(dist[0].second.alignment == ValueVector{r[0], r[1]});
            }
        }
    }
    TEST_CASE("step examples") {
        const Scenario& s = builtin_firefight();
        RandomSource rng(1);
        auto out = step(s, s.initial, "PrepareEquipment", rng);
        CHECK(out.next_state == ff("Moderate", "4", "Ready", "Poor", "Perfect"));
        CHECK(out.alignment == ValueVector{0.5, -0.1});
        CHECK_FALSE(out.terminal);
        out = step(s, s.initial, "EvacuateOccupants", rng);
        CHECK(out.next_state == ff("Moderate", "3", "NotReady", "Poor", "ModeratelyInjured"));
        out = step(s, ff("Severe", "2", "Ready", "Good", "Perfect"), "EvacuateOccupants", rng);
        CHECK(out.next_state == ff("Severe", "1", "NotReady", "Good", "SlightlyInjured"));
        out = step(s, ff("Low", "0", "Ready", "Good", "Perfect"), "ContainFire", rng);
        CHECK(out.terminal == TerminalLabel::success);
        out = step(s, ff("Moderate", "0", "NotReady", "Poor", "ModeratelyInjured"), "EvacuateOccupants", rng);
        CHECK(out.next_state == ff("Moderate", "0", "NotReady", "Poor", "Incapacitated"));
        CHECK(out.terminal == TerminalLabel::failure);
    }
    TEST_CASE("step preconditions") {
        const Scenario& s = builtin_firefight();
        RandomSource rng(1);
        CHECK_THROWS_AS(step(s, ff("None", "0", "Ready", "Good", "Perfect"), "ContainFire", rng), ContractViolation);
        Scenario thirds = parse_ok(kThirds);
        CHECK_THROWS_AS(step(thirds, {0}, "guarded", rng), ContractViolation);
    }
    TEST_CASE("clamping and monotone variables") {
        const Scenario& s = builtin_firefight();
        for (const auto& st : enumerate_states(s)) {
            if (is_terminal(s, st)) continue;
            for (int a = 0; a < 5; ++a)
                for (const auto& [p, o] : successor_distribution(s, st, a)) {
                    CHECK(s.well_formed(o.next_state));
                    CHECK(o.next_state[0] <= st[0]);
                    CHECK(o.next_state[1] <= st[1]);
                    CHECK(o.next_state[4] <= st[4]);
                }
        }
    }
    TEST_CASE("stochastic outcomes") {
        Scenario thirds = parse_ok(kThirds);
        auto dist = successor_distribution(thirds, {0}, 0);
        REQUIRE(dist.size() == 3);
        CHECK(dist[0].first + dist[1].first + dist[2].first == Rational(1));
        CHECK(dist[0].second.next_state == StateVector{1});
        CHECK(dist[2].second.next_state == StateVector{3});
        // same seed, same draws
        RandomSource a(42), b(42);
        for (int i = 0; i < 50; ++i) CHECK(step(thirds, {0}, 0, a) == step(thirds, {0}, 0, b));
        // rough frequencies
        RandomSource r(7);
        int counts[4] = {};
        for (int i = 0; i < 3000; ++i) ++counts[step(thirds, {0}, 0, r).next_state[0]];
        for (int k = 1; k <= 3; ++k) CHECK(std::abs(counts[k] - 1000) < 120);
    }
    TEST_CASE("stochastic asset variant") {
        auto text = read_text_file(testsupport::asset_path("firefight-stochastic.scenario.json"));
        REQUIRE(text);
        Scenario st = parse_ok(*text);
        auto dist = successor_distribution(st, st.initial, st.action_id("ContainFire"));
        REQUIRE(dist.size() == 2);
        CHECK(dist[0].first == Rational(7, 10));
        CHECK(dist[1].second.next_state == st.initial);
        for (const auto& s : enumerate_states(st)) {
            if (is_terminal(st, s)) continue;
            for (int a = 0; a < 5; ++a) {
                Rational sum;
                for (const auto& [p, o] : successor_distribution(st, s, a)) sum += p;
                CHECK(sum == Rational(1));
            }
        }
    }
}
