#include <doctest.h>

#include <algorithm>

#include <json.hpp>

#include "support/support.hpp"
#include "valence/front_io.hpp"
#include "valence/scenario_io.hpp"
#include "valence/solver.hpp"
#include "valence/trajectory.hpp"

using namespace valence;
using nlohmann::ordered_json;

namespace {

bool has_code(const std::vector<Diagnostic>& ds, const std::string& code, Severity sev = Severity::error) {
    return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) { return d.code == code && d.severity == sev; });
}

const Diagnostic* find_code(const std::vector<Diagnostic>& ds, const std::string& code) {
    for (const auto& d : ds)
        if (d.code == code) return &d;
    return nullptr;
}

ordered_json builtin_json() { return ordered_json::parse(builtin_firefight_document()); }

}  // namespace

TEST_SUITE("scenario-io") {
    TEST_CASE("canonical round trip") {
        const Scenario& s = builtin_firefight();
        std::string text = serialize_scenario(s);
        auto again = parse_scenario(text);
        REQUIRE(again.value);
        CHECK(*again.value == s);
        CHECK(again.diagnostics.empty());
        CHECK(serialize_scenario(*again.value) == text);
        CHECK(text == builtin_firefight_document());
    }
    TEST_CASE("shipped asset equals the built-in scenario") {
        auto text = read_text_file(testsupport::asset_path("firefight.scenario.json"));
        REQUIRE(text);
        CHECK(*text == builtin_firefight_document());
        auto parsed = parse_scenario(*text);
        REQUIRE(parsed.value);
        CHECK(scenario_hash(*parsed.value) == scenario_hash(builtin_firefight()));
    }
    TEST_CASE("content hash") {
        std::string h = scenario_hash(builtin_firefight());
        CHECK(h.rfind("sha256:", 0) == 0);
        CHECK(h.size() == 7 + 64);
        auto doc = builtin_json();
        doc["values"][0]["rules"]["ContainFire"]["default"] = 0.7;
        auto changed = parse_scenario(doc.dump());
        REQUIRE(changed.value);
        CHECK(scenario_hash(*changed.value) != h);
        // formatting does not matter
        auto compact = parse_scenario(builtin_json().dump());
        REQUIRE(compact.value);
        CHECK(scenario_hash(*compact.value) == h);
    }
    TEST_CASE("random documents round trip") {
        std::mt19937_64 rng(11);
        for (int i = 0; i < 40; ++i) {
            Scenario s = testsupport::random_scenario(rng);
            auto again = parse_scenario(serialize_scenario(s));
            REQUIRE(again.value);
            CHECK(*again.value == s);
        }
    }
    TEST_CASE("syntax errors are located") {
        auto r = parse_scenario("{\n  \"name\": \"x\",\n  \"variables\": [\n}");
        CHECK_FALSE(r.value);
        const Diagnostic* d = find_code(r.diagnostics, "json-syntax");
        REQUIRE(d);
        CHECK(d->location.line == 4);
    }
    TEST_CASE("unknown level is located at its field") {
        std::string text = R"({
  "format_version": 1,
  "name": "bad",
  "variables": [{"name": "x", "levels": ["A", "B"]}],
  "initial_state": {"x": "C"},
  "actions": [{"name": "go", "effects": []}],
  "values": [{"name": "V", "rules": {"go": {}}}],
  "terminals": [{"when": "x == B", "label": "success"}]
})";
        auto r = parse_scenario(text);
        CHECK_FALSE(r.value);
        const Diagnostic* d = find_code(r.diagnostics, "unknown-level");
        REQUIRE(d);
        CHECK(d->location.line == 5);
        CHECK(d->location.path == "/initial_state/x");
        CHECK(format_diagnostic(*d, "bad.json").rfind("bad.json:5:", 0) == 0);
    }
    TEST_CASE("expression errors point inside the string") {
        auto doc = builtin_json();
        doc["terminals"][0]["when"] = "fire == Nonee";
        auto r = parse_scenario(doc.dump(2));
        CHECK_FALSE(r.value);
        REQUIRE_FALSE(r.diagnostics.empty());
        CHECK(r.diagnostics[0].location.path == "/terminals/0/when");
        CHECK(r.diagnostics[0].location.line > 0);
    }
    TEST_CASE("semantic checks") {
        SUBCASE("probabilities must sum to one") {
            auto doc = builtin_json();
            doc["actions"][1] = {{"name", "ContainFire"},
                                 {"outcomes", {{{"probability", "1/2"}, {"effects", ordered_json::array()}},
                                               {{"probability", "1/3"}, {"effects", ordered_json::array()}}}}};
            CHECK(has_code(parse_scenario(doc.dump()).diagnostics, "probability-sum"));
        }
        SUBCASE("probability range") {
            auto doc = builtin_json();
            doc["actions"][1] = {{"name", "ContainFire"},
                                 {"outcomes", {{{"probability", "3/2"}, {"effects", ordered_json::array()}}}}};
            CHECK(has_code(parse_scenario(doc.dump()).diagnostics, "invalid-probability"));
        }
        SUBCASE("duplicate names") {
            auto doc = builtin_json();
            doc["actions"][1]["name"] = "EvacuateOccupants";
            CHECK(has_code(parse_scenario(doc.dump()).diagnostics, "duplicate-name"));
        }
        SUBCASE("unknown variable in an effect") {
            auto doc = builtin_json();
            doc["actions"][3]["effects"][0]["assign"][0]["variable"] = "water";
            CHECK(has_code(parse_scenario(doc.dump()).diagnostics, "unknown-variable"));
        }
        SUBCASE("missing rule set for an action") {
            auto doc = builtin_json();
            doc["values"][1]["rules"].erase("UpdateKnowledge");
            CHECK(has_code(parse_scenario(doc.dump()).diagnostics, "missing-rule-set"));
        }
        SUBCASE("rules for an unknown action") {
            auto doc = builtin_json();
            doc["values"][1]["rules"]["Dance"] = {{"default", 0}};
            CHECK(has_code(parse_scenario(doc.dump()).diagnostics, "unknown-action"));
        }
        SUBCASE("format version") {
            auto doc = builtin_json();
            doc["format_version"] = 2;
            CHECK(has_code(parse_scenario(doc.dump()).diagnostics, "format-version"));
        }
        SUBCASE("no terminals") {
            auto doc = builtin_json();
            doc["terminals"] = ordered_json::array();
            CHECK(has_code(parse_scenario(doc.dump()).diagnostics, "empty"));
        }
        SUBCASE("bad terminal label") {
            auto doc = builtin_json();
            doc["terminals"][0]["label"] = "draw";
            CHECK(has_code(parse_scenario(doc.dump()).diagnostics, "invalid-label"));
        }
        SUBCASE("warnings do not block parsing") {
            auto doc = builtin_json();
            doc["author"] = "someone";
            doc["values"][0]["rules"]["ContainFire"]["default"] = 1.5;
            auto r = parse_scenario(doc.dump());
            REQUIRE(r.value);
            CHECK(has_code(r.diagnostics, "unknown-field", Severity::warning));
            CHECK(has_code(r.diagnostics, "score-range", Severity::warning));
            CHECK(alignment(*r.value, "Professionalism", r.value->initial, "ContainFire") == 1.0);
        }
    }
}

TEST_SUITE("front-io") {
    TEST_CASE("round trip keeps every layer and supports extraction") {
        for (double gamma : {1.0, 0.9}) {
            SolveConfig config;
            config.gamma = gamma;
            config.horizon = 8;
            const Scenario& s = testsupport::reduced_firefight();
            SolutionFront sol = pmovi(s, config);
            std::string text = serialize_front(sol);
            auto parsed = parse_front(text);
            REQUIRE(parsed.value);
            const SolutionFront& back = *parsed.value;
            CHECK(back.scenario_hash == scenario_hash(s));
            CHECK(back.layers == sol.layers);
            CHECK(back.termination == sol.termination);
            CHECK(back.config.gamma == gamma);
            CHECK(serialize_front(back) == text);
            for (const auto& v : back.front(s.initial)) {
                auto trace = extract_policy(back, s.initial, v);
                auto ret = trace_return(s, trace, gamma);
                CHECK(linf_distance(ret, v) <= 1e-9);
            }
        }
    }
    TEST_CASE("stochastic links keep probabilities") {
        auto text = read_text_file(testsupport::asset_path("firefight-stochastic.scenario.json"));
        REQUIRE(text);
        auto s = parse_scenario(*text);
        REQUIRE(s.value);
        SolveConfig config;
        config.horizon = 6;
        SolutionFront sol = pmovi(*s.value, config);
        auto back = parse_front(serialize_front(sol));
        REQUIRE(back.value);
        CHECK(back.value->layers == sol.layers);
    }
    TEST_CASE("malformed documents") {
        CHECK_FALSE(parse_front("{").value);
        CHECK_FALSE(parse_front("{}").value);
        SolveConfig config;
        config.horizon = 3;
        auto doc = ordered_json::parse(serialize_front(pmovi(testsupport::chain_scenario(), config)));
        doc["format_version"] = 99;
        CHECK_FALSE(parse_front(doc.dump()).value);
    }
    TEST_CASE("summary") {
        SolveConfig config;
        config.horizon = 5;
        const Scenario& s = testsupport::chain_scenario();
        auto sum = front_summary(pmovi(s, config), s.initial);
        CHECK(sum["size"] == 2);
        CHECK(sum["termination"] == "converged");
        CHECK(sum["front"].size() == 2);
    }
}

TEST_SUITE("trajectory") {
    TEST_CASE("scripted play and file round trip") {
        const Scenario& s = builtin_firefight();
        Trajectory t = play_scripted(s, {"PrepareEquipment", "UpdateKnowledge"}, 7, 50);
        REQUIRE(t.steps.size() == 2);
        CHECK(t.outcome(s) == EpisodeOutcome::truncated);
        std::string text = serialize_trajectory(s, t);
        auto back = parse_trajectory(s, text);
        REQUIRE(back.value);
        CHECK(*back.value == t);
        CHECK(serialize_trajectory(s, *back.value) == text);
        CHECK(std::count(text.begin(), text.end(), '\n') == 4);
        CHECK(serialize_trajectory(s, play_scripted(s, {"PrepareEquipment", "UpdateKnowledge"}, 7, 50)) == text);
    }
    TEST_CASE("script errors name the step") {
        const Scenario& s = builtin_firefight();
        try {
            (void)play_scripted(s, {"PrepareEquipment", "Dance"}, 1, 50);
            FAIL("expected ScriptError");
        } catch (const ScriptError& e) {
            CHECK(e.step() == 1);
        }
        Trajectory fail = play_scripted(s, {"EvacuateOccupants", "EvacuateOccupants"}, 1, 50);
        CHECK(fail.outcome(s) == EpisodeOutcome::failure);
        CHECK_THROWS_AS((void)play_scripted(s, {"EvacuateOccupants", "EvacuateOccupants", "ContainFire"}, 1, 50),
                        ScriptError);
    }
    TEST_CASE("horizon truncates") {
        const Scenario& s = builtin_firefight();
        Episode ep(s, 3, 2);
        ep.apply("PrepareEquipment");
        CHECK_FALSE(ep.finished());
        ep.apply("UpdateKnowledge");
        CHECK(ep.finished());
        CHECK(ep.outcome() == EpisodeOutcome::truncated);
        CHECK_THROWS_AS(ep.apply("ContainFire"), ContractViolation);
    }
    TEST_CASE("malformed files") {
        const Scenario& s = builtin_firefight();
        std::string good = serialize_trajectory(s, play_scripted(s, {"PrepareEquipment"}, 1, 50));
        CHECK_FALSE(parse_trajectory(s, "not json\n").value);
        CHECK_FALSE(parse_trajectory(s, "").value);
        std::string no_footer = good.substr(0, good.rfind("{\"kind\":\"outcome\""));
        auto unfinished = parse_trajectory(s, no_footer);  // the outcome line is optional
        REQUIRE(unfinished.value);
        CHECK(unfinished.value->steps.size() == 1);
        std::string wrong_outcome = good;
        wrong_outcome.replace(wrong_outcome.find("truncated"), 9, "success");
        CHECK_FALSE(parse_trajectory(s, wrong_outcome).value);
        std::string unknown_action = good;
        unknown_action.replace(unknown_action.find("PrepareEquipment"), 16, "DanceVigorously");
        CHECK_FALSE(parse_trajectory(s, unknown_action).value);
    }
}
