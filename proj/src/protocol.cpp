#include "valence/protocol.hpp"

#include <algorithm>
#include <deque>
#include <iomanip>
#include <set>
#include <sstream>

#include "document_reader.hpp"
#include "valence/front_io.hpp"

namespace valence {

using nlohmann::json;
using nlohmann::ordered_json;
using detail::pointer_append;

std::string_view to_string(Modality m) {
    switch (m) {
        case Modality::permit: return "permit";
        case Modality::forbid: return "forbid";
        case Modality::oblige: return "oblige";
    }
    return "?";
}

std::string_view to_string(Stance s) { return s == Stance::permissive ? "permissive" : "restrictive"; }

ParseResult<Protocol> parse_protocol(const Scenario& scenario, std::string_view text) {
    ParseResult<Protocol> result;
    auto parsed = detail::parse_located(text);
    if (auto* d = std::get_if<Diagnostic>(&parsed)) {
        result.diagnostics.push_back(*d);
        return result;
    }
    const auto& doc = std::get<detail::LocatedJson>(parsed);
    const json& root = doc.value;
    detail::DocumentReader r(doc.map);
    Protocol p;
    if (r.expect_object(root, "")) {
        static const std::set<std::string> known = {"format_version", "name", "description", "stance", "rules"};
        for (auto it = root.begin(); it != root.end(); ++it)
            if (!known.count(it.key()))
                r.warning("unknown-field", "unknown field '" + it.key() + "' ignored", pointer_append("", it.key()));
        if (auto v = r.integer_field(root, "format_version", "", true); v && *v != kProtocolFormatVersion)
            r.error("format-version", "unsupported format_version " + std::to_string(*v) + " (expected 1)",
                    "/format_version");
        if (auto name = r.string_field(root, "name", "", true)) p.name = *name;
        if (auto d = r.string_field(root, "description", "", false)) p.description = *d;
        if (auto stance = r.string_field(root, "stance", "", false)) {
            if (*stance == "permissive") p.stance = Stance::permissive;
            else if (*stance == "restrictive") p.stance = Stance::restrictive;
            else r.error("invalid-stance", "stance must be 'permissive' or 'restrictive'", "/stance");
        }
        if (const json* rules = r.array_field(root, "rules", "", true)) {
            for (std::size_t i = 0; i < rules->size(); ++i) {
                std::string rp = pointer_append("/rules", i);
                const json& j = (*rules)[i];
                if (!r.expect_object(j, rp)) continue;
                DeonticRule rule;
                rule.location = doc.map.locate(rp);
                if (auto action = r.string_field(j, "action", rp, true)) {
                    rule.action = scenario.find_action(*action);
                    if (rule.action < 0)
                        r.error("unknown-action", "unknown action '" + *action + "'", pointer_append(rp, "action"));
                }
                if (auto m = r.string_field(j, "modality", rp, true)) {
                    if (*m == "permit") rule.modality = Modality::permit;
                    else if (*m == "forbid") rule.modality = Modality::forbid;
                    else if (*m == "oblige") rule.modality = Modality::oblige;
                    else r.error("invalid-modality", "modality must be permit, forbid or oblige",
                                 pointer_append(rp, "modality"));
                }
                if (auto pr = r.integer_field(j, "priority", rp, false)) rule.priority = static_cast<int>(*pr);
                r.guard_field(j, "when", rp, scenario.variables, rule.guard);
                p.rules.push_back(std::move(rule));
            }
        }
    }
    result.diagnostics = std::move(r.diagnostics);
    if (!has_errors(result.diagnostics)) result.value = std::move(p);
    return result;
}

std::string serialize_protocol(const Scenario& scenario, const Protocol& p) {
    ordered_json root;
    root["format_version"] = kProtocolFormatVersion;
    root["name"] = p.name;
    if (!p.description.empty()) root["description"] = p.description;
    root["stance"] = std::string(to_string(p.stance));
    ordered_json rules = ordered_json::array();
    for (const auto& r : p.rules) {
        ordered_json j;
        j["action"] = scenario.actions.at(static_cast<std::size_t>(r.action)).name;
        j["modality"] = std::string(to_string(r.modality));
        if (r.guard) j["when"] = r.guard->render(scenario.variables);
        if (r.priority != 0) j["priority"] = r.priority;
        rules.push_back(std::move(j));
    }
    root["rules"] = std::move(rules);
    return root.dump(2) + "\n";
}

namespace {

bool fires(const DeonticRule& r, const StateVector& s) { return !r.guard || r.guard->eval_bool(s); }

int rank(Modality m) {
    switch (m) {
        case Modality::forbid: return 2;
        case Modality::oblige: return 1;
        case Modality::permit: return 0;
    }
    return 0;
}

std::vector<int> allowed_from(const Protocol& protocol, const StateVector& state, const std::vector<int>& applicable) {
    struct Decision {
        bool any = false;
        int priority = 0;
        Modality modality = Modality::permit;
    };
    std::vector<Decision> decision(applicable.size());
    for (const auto& r : protocol.rules) {
        auto it = std::find(applicable.begin(), applicable.end(), r.action);
        if (it == applicable.end() || !fires(r, state)) continue;
        auto& d = decision[static_cast<std::size_t>(it - applicable.begin())];
        if (!d.any || r.priority > d.priority || (r.priority == d.priority && rank(r.modality) > rank(d.modality))) {
            d.any = true;
            d.priority = r.priority;
            d.modality = r.modality;
        }
    }
    // An obligation only narrows the choice if it survives resolution.
    bool obligation = std::any_of(decision.begin(), decision.end(),
                                  [](const Decision& d) { return d.any && d.modality == Modality::oblige; });
    std::vector<int> out;
    for (std::size_t i = 0; i < applicable.size(); ++i) {
        const auto& d = decision[i];
        bool keep;
        if (obligation) keep = d.any && d.modality == Modality::oblige;
        else if (protocol.stance == Stance::permissive) keep = !(d.any && d.modality == Modality::forbid);
        else keep = d.any && d.modality == Modality::permit;
        if (keep) out.push_back(applicable[i]);
    }
    return out;
}

// Non-terminal states reachable from the initial state under the protocol,
// in discovery order.
std::vector<StateVector> reachable_states(const Scenario& scenario, const Protocol& protocol) {
    std::vector<bool> seen(scenario.state_count(), false);
    std::vector<StateVector> out;
    std::deque<StateVector> queue{scenario.initial};
    seen[scenario.index_of(scenario.initial)] = true;
    while (!queue.empty()) {
        StateVector s = std::move(queue.front());
        queue.pop_front();
        if (is_terminal(scenario, s)) continue;
        out.push_back(s);
        for (int a : allowed_actions(scenario, protocol, s))
            for (const auto& [p, outcome] : successor_distribution(scenario, s, a)) {
                auto idx = scenario.index_of(outcome.next_state);
                if (seen[idx]) continue;
                seen[idx] = true;
                queue.push_back(outcome.next_state);
            }
    }
    return out;
}

Diagnostic rule_diagnostic(Severity severity, std::string code, std::string message, std::size_t rule,
                           const DeonticRule& r) {
    Location loc = r.location;
    if (loc.path.empty()) loc.path = "/rules/" + std::to_string(rule);
    return {severity, std::move(code), std::move(message), std::move(loc)};
}

}  // namespace

std::vector<int> allowed_actions(const Scenario& scenario, const Protocol& protocol, const StateVector& state) {
    return allowed_from(protocol, state, available_actions(scenario, state));
}

std::vector<std::string> allowed_action_names(const Scenario& scenario, const Protocol& protocol,
                                              const StateVector& state) {
    std::vector<std::string> out;
    for (int a : allowed_actions(scenario, protocol, state))
        out.push_back(scenario.actions[static_cast<std::size_t>(a)].name);
    return out;
}

std::vector<Diagnostic> validate_protocol(const Scenario& scenario, const Protocol& protocol) {
    std::vector<Diagnostic> out;
    auto states = enumerate_states(scenario);
    std::vector<StateVector> live;
    for (auto& s : states)
        if (!is_terminal(scenario, s)) live.push_back(std::move(s));

    for (std::size_t i = 0; i < protocol.rules.size(); ++i) {
        const auto& a = protocol.rules[i];
        if (a.modality != Modality::oblige) continue;
        for (std::size_t j = 0; j < protocol.rules.size(); ++j) {
            const auto& b = protocol.rules[j];
            if (b.modality != Modality::forbid || b.action != a.action || b.priority != a.priority) continue;
            auto witness = std::find_if(live.begin(), live.end(),
                                        [&](const StateVector& s) { return fires(a, s) && fires(b, s); });
            if (witness == live.end()) continue;
            out.push_back(rule_diagnostic(
                Severity::error, "conflict",
                "rules " + std::to_string(i) + " (oblige) and " + std::to_string(j) + " (forbid) on " +
                    scenario.actions[static_cast<std::size_t>(a.action)].name + " have equal priority " +
                    std::to_string(a.priority) + " and both fire in " + scenario.describe(*witness),
                i, a));
        }
    }

    auto reachable = reachable_states(scenario, protocol);
    std::size_t empty = 0;
    const StateVector* first_empty = nullptr;
    for (const auto& s : reachable)
        if (allowed_actions(scenario, protocol, s).empty()) {
            if (!first_empty) first_empty = &s;
            ++empty;
        }
    if (first_empty)
        out.push_back({Severity::error, "empty-action-set",
                       "no action is allowed in reachable state " + scenario.describe(*first_empty) +
                           (empty > 1 ? " (and " + std::to_string(empty - 1) + " more)" : ""),
                       Location{"/rules", 0, 0}});

    for (std::size_t i = 0; i < protocol.rules.size(); ++i) {
        const auto& r = protocol.rules[i];
        bool used = std::any_of(reachable.begin(), reachable.end(), [&](const StateVector& s) {
            auto avail = available_actions(scenario, s);
            return fires(r, s) && std::find(avail.begin(), avail.end(), r.action) != avail.end();
        });
        if (!used)
            out.push_back(rule_diagnostic(Severity::warning, "unreachable-rule",
                                          "rule " + std::to_string(i) + " never fires in a reachable state", i, r));
    }
    return out;
}

namespace {

ProtocolEvaluation evaluate_with(const Scenario& scenario, const Protocol& protocol, const SolveConfig& config,
                                 const ParetoSet& unrestricted) {
    ProtocolEvaluation e;
    e.protocol_name = protocol.name;
    e.unrestricted_front = unrestricted;
    SolutionFront sol = pmovi(scenario, config, [&](const StateVector& s) {
        return allowed_actions(scenario, protocol, s);
    });
    e.front = sol.front(scenario.initial);
    e.termination = sol.termination;
    e.approximate = sol.approximate;
    e.maxima = e.front.front();
    for (const auto& v : e.front)
        for (std::size_t d = 0; d < v.size(); ++d) e.maxima[d] = std::max(e.maxima[d], v[d]);
    for (const auto& v : e.front) {
        bool cov = std::any_of(unrestricted.begin(), unrestricted.end(),
                               [&](const ValueVector& u) { return weakly_dominates(u, v, config.tau); });
        if (!cov) e.covered = false;
        if (std::any_of(unrestricted.begin(), unrestricted.end(),
                        [&](const ValueVector& u) { return linf_distance(u, v) <= config.tau; }))
            ++e.shared_members;
    }
    for (const auto& s : enumerate_states(scenario)) {
        if (is_terminal(scenario, s)) continue;
        auto avail = available_actions(scenario, s);
        auto allowed = allowed_actions(scenario, protocol, s);
        for (int a : avail) {
            if (std::find(allowed.begin(), allowed.end(), a) != allowed.end()) continue;
            ++e.removed_transitions;
            if (e.removed_samples.size() < 5) e.removed_samples.push_back({s, a});
        }
    }
    return e;
}

void set_reference(ProtocolEvaluation& e, const ValueVector& ref) {
    e.reference = ref;
    e.hypervolume = hypervolume(e.front, ref);
    e.unrestricted_hypervolume = hypervolume(e.unrestricted_front, ref);
}

std::vector<ValueVector> dominated_members(const ParetoSet& x, const ParetoSet& y) {
    std::vector<ValueVector> out;
    for (const auto& v : x)
        if (std::any_of(y.begin(), y.end(), [&](const ValueVector& w) { return dominates(w, v); })) out.push_back(v);
    return out;
}

}  // namespace

ProtocolEvaluation evaluate_protocol(const Scenario& scenario, const Protocol& protocol, const SolveConfig& config,
                                     const std::optional<ValueVector>& reference) {
    ParetoSet unrestricted = pmovi(scenario, config).front(scenario.initial);
    ProtocolEvaluation e = evaluate_with(scenario, protocol, config, unrestricted);
    if (reference) {
        set_reference(e, *reference);
    } else {
        std::vector<ValueVector> all = e.front;
        all.insert(all.end(), unrestricted.begin(), unrestricted.end());
        set_reference(e, reference_below(all));
    }
    return e;
}

ProtocolComparison compare_protocols(const Scenario& scenario, const Protocol& a, const Protocol& b,
                                     const SolveConfig& config) {
    ParetoSet unrestricted = pmovi(scenario, config).front(scenario.initial);
    ProtocolComparison c;
    c.a = evaluate_with(scenario, a, config, unrestricted);
    c.b = evaluate_with(scenario, b, config, unrestricted);
    std::vector<ValueVector> all = unrestricted;
    all.insert(all.end(), c.a.front.begin(), c.a.front.end());
    all.insert(all.end(), c.b.front.begin(), c.b.front.end());
    ValueVector ref = reference_below(all);
    set_reference(c.a, ref);
    set_reference(c.b, ref);
    c.a_dominated_by_b = dominated_members(c.a.front, c.b.front);
    c.b_dominated_by_a = dominated_members(c.b.front, c.a.front);
    return c;
}

namespace {

ordered_json vectors_json(const std::vector<ValueVector>& vs) {
    ordered_json out = ordered_json::array();
    for (const auto& v : vs) out.push_back(vector_json(v));
    return out;
}

std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << (x == 0.0 ? 0.0 : x);
    return os.str();
}

}  // namespace

ordered_json evaluation_json(const Scenario& scenario, const ProtocolEvaluation& e) {
    ordered_json out;
    out["protocol"] = e.protocol_name;
    ordered_json values = ordered_json::array();
    for (const auto& v : scenario.values) values.push_back(v.name);
    out["values"] = std::move(values);
    out["front"] = vectors_json(e.front);
    out["unrestricted_front"] = vectors_json(e.unrestricted_front);
    out["termination"] = std::string(to_string(e.termination));
    out["approximate"] = e.approximate;
    out["reference"] = vector_json(e.reference);
    out["hypervolume"] = e.hypervolume;
    out["unrestricted_hypervolume"] = e.unrestricted_hypervolume;
    ordered_json maxima = ordered_json::object();
    for (std::size_t d = 0; d < e.maxima.size(); ++d) maxima[scenario.values[d].name] = e.maxima[d];
    out["maxima"] = std::move(maxima);
    out["covered_by_unrestricted"] = e.covered;
    out["shared_members"] = e.shared_members;
    ordered_json removed;
    removed["count"] = e.removed_transitions;
    ordered_json samples = ordered_json::array();
    for (const auto& s : e.removed_samples)
        samples.push_back({{"state", state_json(scenario.variables, s.state)},
                           {"action", scenario.actions[static_cast<std::size_t>(s.action)].name}});
    removed["samples"] = std::move(samples);
    out["removed_transitions"] = std::move(removed);
    out["added_transitions"] = {{"count", e.added_transitions}, {"samples", ordered_json::array()}};
    return out;
}

ordered_json comparison_json(const Scenario& scenario, const ProtocolComparison& c) {
    ordered_json out;
    out["a"] = evaluation_json(scenario, c.a);
    out["b"] = evaluation_json(scenario, c.b);
    out["a_dominated_by_b"] = vectors_json(c.a_dominated_by_b);
    out["b_dominated_by_a"] = vectors_json(c.b_dominated_by_a);
    return out;
}

std::string evaluation_text(const Scenario& scenario, const ProtocolEvaluation& e) {
    std::ostringstream os;
    os << "Protocol " << e.protocol_name << "\n";
    os << "  front (" << e.front.size() << "):";
    for (const auto& v : e.front) os << " " << format_vector(v);
    os << "\n  unrestricted front (" << e.unrestricted_front.size() << "):";
    for (const auto& v : e.unrestricted_front) os << " " << format_vector(v);
    os << "\n  hypervolume " << num(e.hypervolume) << " (unrestricted " << num(e.unrestricted_hypervolume)
       << ", reference " << format_vector(e.reference) << ")\n";
    os << "  maxima:";
    for (std::size_t d = 0; d < e.maxima.size(); ++d) os << " " << scenario.values[d].name << " " << num(e.maxima[d]);
    os << "\n  " << (e.covered ? "every member is matched or dominated by the unrestricted front"
                               : "some members are not covered by the unrestricted front")
       << "; " << e.shared_members << " shared with it\n";
    os << "  removed transitions: " << e.removed_transitions << "\n";
    for (const auto& s : e.removed_samples)
        os << "    " << scenario.actions[static_cast<std::size_t>(s.action)].name << " in "
           << scenario.describe(s.state) << "\n";
    return os.str();
}

std::string comparison_text(const Scenario& scenario, const ProtocolComparison& c) {
    std::ostringstream os;
    os << std::left << std::setw(22) << "" << std::setw(30) << c.a.protocol_name << c.b.protocol_name << "\n";
    auto row = [&](const std::string& label, const std::string& x, const std::string& y) {
        os << std::left << std::setw(22) << label << std::setw(30) << x << y << "\n";
    };
    row("front size", std::to_string(c.a.front.size()), std::to_string(c.b.front.size()));
    row("hypervolume", num(c.a.hypervolume), num(c.b.hypervolume));
    for (std::size_t d = 0; d < scenario.values.size(); ++d)
        row("max " + scenario.values[d].name, num(c.a.maxima[d]), num(c.b.maxima[d]));
    row("removed transitions", std::to_string(c.a.removed_transitions), std::to_string(c.b.removed_transitions));
    os << "reference " << format_vector(c.a.reference) << "\n";
    os << c.a.protocol_name << " members dominated by " << c.b.protocol_name << ": " << c.a_dominated_by_b.size() << "\n";
    for (const auto& v : c.a_dominated_by_b) os << "  " << format_vector(v) << "\n";
    os << c.b.protocol_name << " members dominated by " << c.a.protocol_name << ": " << c.b_dominated_by_a.size() << "\n";
    for (const auto& v : c.b_dominated_by_a) os << "  " << format_vector(v) << "\n";
    return os.str();
}

}  // namespace valence
