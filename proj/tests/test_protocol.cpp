#include <doctest.h>

#include <random>

#include "support/support.hpp"
#include "valence/protocol.hpp"
#include "valence/scenario_io.hpp"

using namespace valence;

namespace {

Protocol parse_ok(const Scenario& s, const std::string& text) {
    auto r = parse_protocol(s, text);
    for (const auto& d : r.diagnostics) MESSAGE(format_diagnostic(d));
    REQUIRE(r.value);
    return *r.value;
}

std::string doc(const std::string& stance, const std::string& rules) {
    return R"({"format_version": 1, "name": "p", "stance": ")" + stance + R"(", "rules": [)" + rules + "]}";
}

bool has_code(const std::vector<Diagnostic>& ds, const std::string& code) {
    for (const auto& d : ds)
        if (d.code == code) return true;
    return false;
}

SolveConfig short_config() {
    SolveConfig c;
    c.horizon = 8;
    return c;
}

}  // namespace

TEST_SUITE("protocol") {
    TEST_CASE("shipped samples parse, validate and round trip") {
        const Scenario& s = builtin_firefight();
        for (const char* name : {"sop-safety-first.protocol.json", "sop-rapid-entry.protocol.json"}) {
            auto text = read_text_file(testsupport::asset_path(name));
            REQUIRE(text);
            Protocol p = parse_ok(s, *text);
            CHECK_FALSE(has_errors(validate_protocol(s, p)));
            Protocol again = parse_ok(s, serialize_protocol(s, p));
            CHECK(again == p);
        }
    }
    TEST_CASE("parse errors") {
        const Scenario& s = builtin_firefight();
        CHECK(has_code(parse_protocol(s, doc("sideways", "")).diagnostics, "invalid-stance"));
        CHECK(has_code(parse_protocol(s, doc("permissive", R"({"action": "Dance", "modality": "permit"})")).diagnostics,
                       "unknown-action"));
        CHECK(has_code(
            parse_protocol(s, doc("permissive", R"({"action": "ContainFire", "modality": "maybe"})")).diagnostics,
            "invalid-modality"));
        CHECK_FALSE(parse_protocol(s, doc("permissive", R"({"action": "ContainFire", "modality": "permit", "when": "fire +"})")).value);
        CHECK_FALSE(parse_protocol(s, "[").value);
    }
    TEST_CASE("permissive forbids") {
        const Scenario& s = builtin_firefight();
        Protocol p = parse_ok(s, doc("permissive", R"({"action": "EvacuateOccupants", "modality": "forbid", "when": "equipment == NotReady"})"));
        auto names = allowed_action_names(s, p, s.initial);
        CHECK(names.size() == 4);
        CHECK(std::find(names.begin(), names.end(), "EvacuateOccupants") == names.end());
        StateVector ready = s.initial;
        ready[2] = 1;
        CHECK(allowed_actions(s, p, ready).size() == 5);
    }
    TEST_CASE("obligations narrow the choice") {
        const Scenario& s = builtin_firefight();
        Protocol p = parse_ok(s, doc("permissive", R"({"action": "PrepareEquipment", "modality": "oblige", "when": "equipment == NotReady"},
                                                     {"action": "UpdateKnowledge", "modality": "oblige", "when": "knowledge == Poor"})"));
        CHECK(allowed_action_names(s, p, s.initial) == std::vector<std::string>{"PrepareEquipment", "UpdateKnowledge"});
        StateVector done = s.initial;
        done[2] = 1;
        done[3] = 1;
        CHECK(allowed_actions(s, p, done).size() == 5);
    }
    TEST_CASE("priorities and tie-breaks") {
        const Scenario& s = builtin_firefight();
        SUBCASE("higher priority wins") {
            Protocol p = parse_ok(s, doc("permissive", R"({"action": "ContainFire", "modality": "forbid"},
                                                         {"action": "ContainFire", "modality": "permit", "priority": 1})"));
            CHECK(allowed_actions(s, p, s.initial).size() == 5);
        }
        SUBCASE("forbid beats permit at equal priority") {
            Protocol p = parse_ok(s, doc("permissive", R"({"action": "ContainFire", "modality": "permit"},
                                                         {"action": "ContainFire", "modality": "forbid"})"));
            CHECK(allowed_actions(s, p, s.initial).size() == 4);
        }
        SUBCASE("forbid beats oblige at equal priority") {
            Protocol p = parse_ok(s, doc("permissive", R"({"action": "ContainFire", "modality": "oblige"},
                                                         {"action": "ContainFire", "modality": "forbid"})"));
            CHECK(allowed_actions(s, p, s.initial).size() == 4);
            CHECK(has_code(validate_protocol(s, p), "conflict"));
        }
        SUBCASE("oblige beats permit at equal priority") {
            Protocol p = parse_ok(s, doc("permissive", R"({"action": "ContainFire", "modality": "permit"},
                                                         {"action": "ContainFire", "modality": "oblige"})"));
            CHECK(allowed_action_names(s, p, s.initial) == std::vector<std::string>{"ContainFire"});
        }
    }
    TEST_CASE("restrictive stance whitelists") {
        const Scenario& s = builtin_firefight();
        Protocol p = parse_ok(s, doc("restrictive", R"({"action": "ContainFire", "modality": "permit"},
                                                      {"action": "PrepareEquipment", "modality": "permit", "when": "equipment == NotReady"})"));
        CHECK(allowed_action_names(s, p, s.initial) == std::vector<std::string>{"ContainFire", "PrepareEquipment"});
        CHECK_THROWS_AS(allowed_actions(s, p, {0, 0, 1, 1, 3}), ContractViolation);
    }
    TEST_CASE("validation") {
        const Scenario& s = builtin_firefight();
        SUBCASE("conflict names a witness state") {
            Protocol p = parse_ok(s, doc("permissive", R"({"action": "ContainFire", "modality": "oblige", "when": "fire >= Low"},
                                                         {"action": "ContainFire", "modality": "forbid", "when": "fire == High"})"));
            auto ds = validate_protocol(s, p);
            REQUIRE(has_code(ds, "conflict"));
            for (const auto& d : ds)
                if (d.code == "conflict") CHECK(d.message.find("High") != std::string::npos);
        }
        SUBCASE("different priorities do not conflict") {
            Protocol p = parse_ok(s, doc("permissive", R"({"action": "ContainFire", "modality": "oblige"},
                                                         {"action": "ContainFire", "modality": "forbid", "priority": 1})"));
            CHECK_FALSE(has_code(validate_protocol(s, p), "conflict"));
        }
        SUBCASE("empty action set") {
            Protocol p = parse_ok(s, doc("restrictive", R"({"action": "ContainFire", "modality": "permit", "when": "fire == Severe"})"));
            CHECK(has_code(validate_protocol(s, p), "empty-action-set"));
        }
        SUBCASE("unreachable rule is a warning") {
            Protocol p = parse_ok(s, doc("permissive", R"({"action": "ContainFire", "modality": "forbid", "when": "fire == Severe"})"));
            auto ds = validate_protocol(s, p);
            CHECK(has_code(ds, "unreachable-rule"));
            CHECK_FALSE(has_errors(ds));
        }
    }
    TEST_CASE("empty permissive protocol changes nothing") {
        const Scenario& s = testsupport::reduced_firefight();
        Protocol p = parse_ok(s, doc("permissive", ""));
        auto e = evaluate_protocol(s, p, short_config());
        CHECK(e.front == e.unrestricted_front);
        CHECK(e.hypervolume == e.unrestricted_hypervolume);
        CHECK(e.covered);
        CHECK(e.removed_transitions == 0);
        CHECK(e.added_transitions == 0);
    }
    TEST_CASE("restriction never improves the front") {
        const Scenario& s = testsupport::reduced_firefight();
        std::mt19937_64 rng(8);
        int evaluated = 0;
        for (int i = 0; i < 40 && evaluated < 8; ++i) {
            auto parsed = parse_protocol(s, testsupport::random_protocol_document(rng, s));
            REQUIRE(parsed.value);
            if (has_errors(validate_protocol(s, *parsed.value))) continue;
            auto e = evaluate_protocol(s, *parsed.value, short_config());
            for (const auto& v : e.front) {
                bool covered = false;
                for (const auto& w : e.unrestricted_front) covered = covered || weakly_dominates(w, v, 1e-9);
                CHECK(covered);
            }
            CHECK(e.covered);
            CHECK(e.hypervolume <= e.unrestricted_hypervolume + 1e-9);
            ++evaluated;
        }
        CHECK(evaluated >= 4);
    }
    TEST_CASE("comparison shares one reference") {
        const Scenario& s = builtin_firefight();
        auto a = parse_ok(s, *read_text_file(testsupport::asset_path("sop-safety-first.protocol.json")));
        auto b = parse_ok(s, *read_text_file(testsupport::asset_path("sop-rapid-entry.protocol.json")));
        auto c = compare_protocols(s, a, b, SolveConfig{});
        CHECK(c.a.reference == c.b.reference);
        CHECK(c.a.hypervolume == doctest::Approx(hypervolume(c.a.front, c.a.reference)));
        CHECK(c.b.hypervolume == doctest::Approx(hypervolume(c.b.front, c.b.reference)));
        auto j = comparison_json(s, c);
        CHECK(j.contains("a"));
        CHECK_FALSE(comparison_text(s, c).empty());
        CHECK_FALSE(evaluation_text(s, c.a).empty());
        CHECK(evaluation_json(s, c.a)["protocol"].is_string());
    }
}
