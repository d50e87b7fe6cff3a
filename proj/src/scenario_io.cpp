#include "valence/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "document_reader.hpp"

namespace valence {

using nlohmann::json;
using nlohmann::ordered_json;
using detail::DocumentReader;
using detail::pointer_append;

namespace {

class ScenarioReader {
public:
    ScenarioReader(const json& root, const detail::SourceMap& map) : root_(root), r_(map) {}

    ParseResult<Scenario> read() {
        ParseResult<Scenario> result;
        if (!r_.expect_object(root_, "")) return finish(std::move(result));
        check_top_level();
        read_header();
        if (!read_variables()) return finish(std::move(result));
        read_initial_state();
        read_actions();
        read_values();
        read_terminals();
        if (!r_.failed()) result.value = std::move(s_);
        return finish(std::move(result));
    }

private:
    const json& root_;
    DocumentReader r_;
    Scenario s_;

    ParseResult<Scenario> finish(ParseResult<Scenario> result) {
        result.diagnostics = std::move(r_.diagnostics);
        return result;
    }

    void check_top_level() {
        static const std::set<std::string> known = {"format_version", "name",    "description", "variables",
                                                    "initial_state",  "actions", "values",      "terminals"};
        for (auto it = root_.begin(); it != root_.end(); ++it)
            if (!known.count(it.key()))
                r_.warning("unknown-field", "unknown field '" + it.key() + "' ignored", pointer_append("", it.key()));
    }

    void read_header() {
        if (auto v = r_.integer_field(root_, "format_version", "", true); v && *v != kScenarioFormatVersion)
            r_.error("format-version", "unsupported format_version " + std::to_string(*v) + " (expected 1)",
                     "/format_version");
        if (auto name = r_.string_field(root_, "name", "", true)) {
            if (name->empty()) r_.error("invalid-name", "scenario name must not be empty", "/name");
            s_.name = *name;
        }
        if (auto d = r_.string_field(root_, "description", "", false)) s_.description = *d;
    }

    bool read_variables() {
        const json* vars = r_.array_field(root_, "variables", "", true);
        if (!vars) return false;
        if (vars->empty()) r_.error("empty", "a scenario needs at least one variable", "/variables");
        std::size_t errors_before = r_.diagnostics.size();
        std::set<std::string> seen;
        for (std::size_t i = 0; i < vars->size(); ++i) {
            std::string p = pointer_append("/variables", i);
            const json& v = (*vars)[i];
            if (!r_.expect_object(v, p)) continue;
            VariableDef def;
            auto name = r_.string_field(v, "name", p, true);
            if (name) {
                if (!detail::is_identifier(*name))
                    r_.error("invalid-name", "variable name '" + *name + "' is not an identifier",
                             pointer_append(p, "name"));
                else if (!seen.insert(*name).second)
                    r_.error("duplicate-name", "duplicate variable '" + *name + "'", pointer_append(p, "name"));
                def.name = *name;
            }
            const json* levels = r_.array_field(v, "levels", p, true);
            if (levels) {
                if (levels->empty())
                    r_.error("empty", "variable '" + def.name + "' has an empty domain", pointer_append(p, "levels"));
                std::set<std::string> level_names;
                for (std::size_t j = 0; j < levels->size(); ++j) {
                    std::string lp = pointer_append(pointer_append(p, "levels"), j);
                    const json& l = (*levels)[j];
                    std::string level;
                    if (l.is_string()) level = l.get<std::string>();
                    else if (l.is_number_unsigned()) level = std::to_string(l.get<unsigned long long>());
                    else {
                        r_.error("type", "level names must be strings", lp);
                        continue;
                    }
                    if (!detail::is_level_name(level))
                        r_.error("invalid-name", "level '" + level + "' must be an identifier or a number", lp);
                    else if (!level_names.insert(level).second)
                        r_.error("duplicate-name", "duplicate level '" + level + "' in variable '" + def.name + "'",
                                 lp);
                    def.levels.push_back(level);
                }
            }
            s_.variables.push_back(std::move(def));
        }
        return !has_errors(std::span(r_.diagnostics).subspan(errors_before)) && !vars->empty();
    }

    std::optional<int> level_of(const VariableDef& var, const json& value, const std::string& pointer) {
        std::string level;
        if (value.is_string()) level = value.get<std::string>();
        else if (value.is_number_unsigned()) level = std::to_string(value.get<unsigned long long>());
        else {
            r_.error("type", "expected a level name", pointer);
            return std::nullopt;
        }
        int idx = var.level_index(level);
        if (idx < 0) {
            r_.error("unknown-level", "'" + level + "' is not a level of variable '" + var.name + "'", pointer);
            return std::nullopt;
        }
        return idx;
    }

    void read_initial_state() {
        const json* init = r_.object_field(root_, "initial_state", "", true);
        if (!init) return;
        s_.initial.levels.assign(s_.variables.size(), 0);
        for (auto it = init->begin(); it != init->end(); ++it)
            if (s_.find_variable(it.key()) < 0)
                r_.error("unknown-variable", "initial_state names unknown variable '" + it.key() + "'",
                         pointer_append("/initial_state", it.key()));
        for (std::size_t i = 0; i < s_.variables.size(); ++i) {
            const auto& var = s_.variables[i];
            auto it = init->find(var.name);
            if (it == init->end()) {
                r_.error("missing-initial", "initial_state has no entry for variable '" + var.name + "'",
                         "/initial_state");
                continue;
            }
            if (auto idx = level_of(var, *it, pointer_append("/initial_state", var.name))) s_.initial[i] = *idx;
        }
    }

    std::optional<Assignment> read_assignment(const json& a, const std::string& p) {
        if (!r_.expect_object(a, p)) return std::nullopt;
        auto var_name = r_.string_field(a, "variable", p, true);
        if (!var_name) return std::nullopt;
        int var = s_.find_variable(*var_name);
        if (var < 0) {
            r_.error("unknown-variable", "unknown variable '" + *var_name + "'", pointer_append(p, "variable"));
            return std::nullopt;
        }
        Assignment out;
        out.variable = var;
        int kinds = int(a.contains("set")) + int(a.contains("increment")) + int(a.contains("decrement"));
        if (kinds != 1) {
            r_.error("invalid-assignment", "an assignment needs exactly one of 'set', 'increment' or 'decrement'", p);
            return std::nullopt;
        }
        if (a.contains("set")) {
            auto idx = level_of(s_.variables[static_cast<std::size_t>(var)], a["set"], pointer_append(p, "set"));
            if (!idx) return std::nullopt;
            out.kind = Assignment::Kind::set;
            out.amount = *idx;
            return out;
        }
        const char* key = a.contains("increment") ? "increment" : "decrement";
        auto amount = r_.integer_field(a, key, p, true);
        if (!amount) return std::nullopt;
        if (*amount < 1 || *amount > 1000000) {
            r_.error("invalid-assignment", std::string("'") + key + "' must be a positive integer",
                     pointer_append(p, key));
            return std::nullopt;
        }
        out.kind = a.contains("increment") ? Assignment::Kind::increment : Assignment::Kind::decrement;
        out.amount = static_cast<int>(*amount);
        return out;
    }

    std::vector<EffectRule> read_effects(const json& effects, const std::string& p) {
        std::vector<EffectRule> out;
        for (std::size_t i = 0; i < effects.size(); ++i) {
            std::string ep = pointer_append(p, i);
            const json& e = effects[i];
            if (!r_.expect_object(e, ep)) continue;
            EffectRule rule;
            r_.guard_field(e, "when", ep, s_.variables, rule.guard);
            if (const json* assign = r_.array_field(e, "assign", ep, true)) {
                for (std::size_t j = 0; j < assign->size(); ++j)
                    if (auto a = read_assignment((*assign)[j], pointer_append(pointer_append(ep, "assign"), j)))
                        rule.assignments.push_back(*a);
            }
            out.push_back(std::move(rule));
        }
        return out;
    }

    std::optional<Rational> read_probability(const json& v, const std::string& p) {
        std::optional<Rational> prob;
        if (v.is_string()) prob = Rational::parse(v.get<std::string>());
        else if (v.is_number_integer()) prob = Rational(v.get<long long>());
        else if (v.is_number_float()) {
            std::ostringstream os;
            os << std::setprecision(15) << v.get<double>();
            prob = Rational::parse(os.str());
        }
        if (!prob) {
            r_.error("invalid-probability", "probability must be a rational such as \"7/10\"", p);
            return std::nullopt;
        }
        if (*prob <= Rational(0) || *prob > Rational(1)) {
            r_.error("invalid-probability", "probability " + prob->str() + " is outside (0, 1]", p);
            return std::nullopt;
        }
        return prob;
    }

    void read_actions() {
        const json* actions = r_.array_field(root_, "actions", "", true);
        if (!actions) return;
        if (actions->empty()) r_.error("empty", "a scenario needs at least one action", "/actions");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < actions->size(); ++i) {
            std::string p = pointer_append("/actions", i);
            const json& a = (*actions)[i];
            ActionDef def;
            if (!r_.expect_object(a, p)) {
                s_.actions.push_back(std::move(def));
                continue;
            }
            if (auto name = r_.string_field(a, "name", p, true)) {
                if (!detail::is_identifier(*name))
                    r_.error("invalid-name", "action name '" + *name + "' is not an identifier",
                             pointer_append(p, "name"));
                else if (!seen.insert(*name).second)
                    r_.error("duplicate-name", "duplicate action '" + *name + "'", pointer_append(p, "name"));
                def.name = *name;
            }
            r_.guard_field(a, "applicable", p, s_.variables, def.applicable);

            bool has_outcomes = a.contains("outcomes");
            bool has_effects = a.contains("effects");
            if (has_outcomes == has_effects) {
                r_.error("invalid-action", "an action needs exactly one of 'effects' or 'outcomes'", p);
            } else if (has_effects) {
                if (const json* effects = r_.array_field(a, "effects", p, true))
                    def.outcomes.push_back(Outcome{Rational(1), read_effects(*effects, pointer_append(p, "effects"))});
            } else if (const json* outcomes = r_.array_field(a, "outcomes", p, true)) {
                std::string op = pointer_append(p, "outcomes");
                if (outcomes->empty()) r_.error("empty", "an action needs at least one outcome", op);
                Rational total(0);
                bool complete = true;
                for (std::size_t j = 0; j < outcomes->size(); ++j) {
                    std::string oj = pointer_append(op, j);
                    const json& o = (*outcomes)[j];
                    if (!r_.expect_object(o, oj)) {
                        complete = false;
                        continue;
                    }
                    Outcome outcome;
                    const json* pv = r_.field(o, "probability", oj, true);
                    auto prob = pv ? read_probability(*pv, pointer_append(oj, "probability")) : std::nullopt;
                    if (prob) {
                        outcome.probability = *prob;
                        total += *prob;
                    } else {
                        complete = false;
                    }
                    if (const json* effects = r_.array_field(o, "effects", oj, true))
                        outcome.effects = read_effects(*effects, pointer_append(oj, "effects"));
                    def.outcomes.push_back(std::move(outcome));
                }
                if (complete && !outcomes->empty() && total != Rational(1))
                    r_.error("probability-sum", "outcome probabilities of '" + def.name + "' sum to " + total.str() +
                                                    ", not 1",
                             op);
            }
            s_.actions.push_back(std::move(def));
        }
    }

    std::optional<Expr> read_score(const json& v, const std::string& p) {
        std::optional<Expr> e;
        if (v.is_number()) e = Expr::constant(v.get<double>());
        else if (v.is_string()) e = r_.expression(v.get<std::string>(), p, s_.variables, ExprType::number);
        else r_.error("type", "score must be a number or an expression string", p);
        if (e) check_score_range(*e, p);
        return e;
    }

    void check_score_range(const Expr& e, const std::string& p) {
        if (auto c = e.constant_value(); c && (*c < -1.0 || *c > 1.0))
            r_.warning("score-range", "score " + json(*c).dump() + " lies outside [-1, 1] and will be clamped", p);
    }

    void read_values() {
        const json* values = r_.array_field(root_, "values", "", true);
        if (!values) return;
        if (values->empty()) r_.error("empty", "a scenario needs at least one value", "/values");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < values->size(); ++i) {
            std::string p = pointer_append("/values", i);
            const json& v = (*values)[i];
            if (!r_.expect_object(v, p)) continue;
            ValueDef def;
            if (auto name = r_.string_field(v, "name", p, true)) {
                if (name->empty()) r_.error("invalid-name", "value name must not be empty", pointer_append(p, "name"));
                else if (!seen.insert(*name).second)
                    r_.error("duplicate-name", "duplicate value '" + *name + "'", pointer_append(p, "name"));
                def.name = *name;
            }
            def.rules.resize(s_.actions.size());
            const json* rules = r_.object_field(v, "rules", p, true);
            if (rules) {
                std::string rp = pointer_append(p, "rules");
                for (auto it = rules->begin(); it != rules->end(); ++it)
                    if (s_.find_action(it.key()) < 0)
                        r_.error("unknown-action", "rules name unknown action '" + it.key() + "'",
                                 pointer_append(rp, it.key()));
                for (std::size_t a = 0; a < s_.actions.size(); ++a) {
                    const std::string& action = s_.actions[a].name;
                    auto it = rules->find(action);
                    if (it == rules->end()) {
                        r_.error("missing-rule-set",
                                 "value '" + def.name + "' has no alignment rules for action '" + action + "'", rp);
                        continue;
                    }
                    def.rules[a] = read_rule_set(*it, pointer_append(rp, action));
                }
            }
            s_.values.push_back(std::move(def));
        }
    }

    AlignmentRuleSet read_rule_set(const json& rs, const std::string& p) {
        AlignmentRuleSet out;
        if (!r_.expect_object(rs, p)) return out;
        if (const json* d = r_.field(rs, "default", p, false)) {
            if (!d->is_number()) r_.error("type", "default score must be a number", pointer_append(p, "default"));
            else {
                out.default_score = d->get<double>();
                check_score_range(Expr::constant(out.default_score), pointer_append(p, "default"));
            }
        }
        if (const json* cases = r_.array_field(rs, "cases", p, false)) {
            for (std::size_t i = 0; i < cases->size(); ++i) {
                std::string cp = pointer_append(pointer_append(p, "cases"), i);
                const json& c = (*cases)[i];
                if (!r_.expect_object(c, cp)) continue;
                AlignmentCase ac;
                r_.guard_field(c, "when", cp, s_.variables, ac.guard);
                const json* score = r_.field(c, "score", cp, true);
                if (!score) continue;
                if (auto e = read_score(*score, pointer_append(cp, "score"))) {
                    ac.score = std::move(*e);
                    out.cases.push_back(std::move(ac));
                }
            }
        }
        return out;
    }

    void read_terminals() {
        const json* terminals = r_.array_field(root_, "terminals", "", true);
        if (!terminals) return;
        if (terminals->empty()) r_.error("empty", "a scenario needs at least one terminal condition", "/terminals");
        for (std::size_t i = 0; i < terminals->size(); ++i) {
            std::string p = pointer_append("/terminals", i);
            const json& t = (*terminals)[i];
            if (!r_.expect_object(t, p)) continue;
            TerminalSpec spec;
            if (auto label = r_.string_field(t, "label", p, true)) {
                if (*label == "success") spec.label = TerminalLabel::success;
                else if (*label == "failure") spec.label = TerminalLabel::failure;
                else r_.error("invalid-label", "terminal label must be 'success' or 'failure'", pointer_append(p, "label"));
            }
            auto when = r_.string_field(t, "when", p, true);
            if (!when) continue;
            if (auto e = r_.expression(*when, pointer_append(p, "when"), s_.variables, ExprType::boolean))
                spec.condition = std::move(*e);
            s_.terminals.push_back(std::move(spec));
        }
    }
};

ordered_json write_effects(const Scenario& s, const std::vector<EffectRule>& effects) {
    ordered_json out = ordered_json::array();
    for (const auto& rule : effects) {
        ordered_json e = ordered_json::object();
        if (rule.guard) e["when"] = rule.guard->render(s.variables);
        ordered_json assign = ordered_json::array();
        for (const auto& a : rule.assignments) {
            const auto& var = s.variables[static_cast<std::size_t>(a.variable)];
            ordered_json j;
            j["variable"] = var.name;
            switch (a.kind) {
                case Assignment::Kind::set: j["set"] = var.levels[static_cast<std::size_t>(a.amount)]; break;
                case Assignment::Kind::increment: j["increment"] = a.amount; break;
                case Assignment::Kind::decrement: j["decrement"] = a.amount; break;
            }
            assign.push_back(std::move(j));
        }
        e["assign"] = std::move(assign);
        out.push_back(std::move(e));
    }
    return out;
}

ordered_json write_score(const Scenario& s, const Expr& e) {
    if (e.nodes().size() == 1 && e.nodes()[0].op == Expr::Op::number) return e.nodes()[0].number;
    return e.render(s.variables);
}

}  // namespace

ParseResult<Scenario> parse_scenario(std::string_view text) {
    auto parsed = detail::parse_located(text);
    if (auto* d = std::get_if<Diagnostic>(&parsed)) {
        ParseResult<Scenario> r;
        r.diagnostics.push_back(*d);
        return r;
    }
    auto& doc = std::get<detail::LocatedJson>(parsed);
    return ScenarioReader(doc.value, doc.map).read();
}

std::string serialize_scenario(const Scenario& s) {
    ordered_json root;
    root["format_version"] = kScenarioFormatVersion;
    root["name"] = s.name;
    if (!s.description.empty()) root["description"] = s.description;

    ordered_json vars = ordered_json::array();
    for (const auto& v : s.variables) vars.push_back({{"name", v.name}, {"levels", v.levels}});
    root["variables"] = std::move(vars);

    ordered_json init = ordered_json::object();
    for (std::size_t i = 0; i < s.variables.size(); ++i)
        init[s.variables[i].name] = s.variables[i].levels[static_cast<std::size_t>(s.initial[i])];
    root["initial_state"] = std::move(init);

    ordered_json actions = ordered_json::array();
    for (const auto& a : s.actions) {
        ordered_json j;
        j["name"] = a.name;
        if (a.applicable) j["applicable"] = a.applicable->render(s.variables);
        if (a.outcomes.size() == 1 && a.outcomes[0].probability == Rational(1)) {
            j["effects"] = write_effects(s, a.outcomes[0].effects);
        } else {
            ordered_json outcomes = ordered_json::array();
            for (const auto& o : a.outcomes)
                outcomes.push_back({{"probability", o.probability.str()}, {"effects", write_effects(s, o.effects)}});
            j["outcomes"] = std::move(outcomes);
        }
        actions.push_back(std::move(j));
    }
    root["actions"] = std::move(actions);

    ordered_json values = ordered_json::array();
    for (const auto& v : s.values) {
        ordered_json rules = ordered_json::object();
        for (std::size_t a = 0; a < s.actions.size(); ++a) {
            const auto& rs = v.rules[a];
            ordered_json j = ordered_json::object();
            if (!rs.cases.empty()) {
                ordered_json cases = ordered_json::array();
                for (const auto& c : rs.cases) {
                    ordered_json cj;
                    if (c.guard) cj["when"] = c.guard->render(s.variables);
                    cj["score"] = write_score(s, c.score);
                    cases.push_back(std::move(cj));
                }
                j["cases"] = std::move(cases);
            }
            if (rs.default_score != 0.0) j["default"] = rs.default_score;
            rules[s.actions[a].name] = std::move(j);
        }
        values.push_back({{"name", v.name}, {"rules", std::move(rules)}});
    }
    root["values"] = std::move(values);

    ordered_json terminals = ordered_json::array();
    for (const auto& t : s.terminals)
        terminals.push_back({{"when", t.condition.render(s.variables)}, {"label", std::string(to_string(t.label))}});
    root["terminals"] = std::move(terminals);

    return root.dump(2) + "\n";
}

std::string scenario_hash(const Scenario& scenario) {
    std::string text = serialize_scenario(scenario);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    os << "sha256:";
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

std::optional<std::string> read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool write_text_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    return static_cast<bool>(out.flush());
}

Expr parse_guard(const Scenario& scenario, std::string_view text) {
    return Expr::parse(text, scenario.variables, ExprType::boolean);
}

}  // namespace valence
