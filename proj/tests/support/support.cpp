#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "valence/scenario_io.hpp"

#ifndef VALENCE_TEST_FIXTURES
#define VALENCE_TEST_FIXTURES "tests/fixtures"
#endif
#ifndef VALENCE_ASSET_DIR
#define VALENCE_ASSET_DIR "assets"
#endif

namespace testsupport {

using nlohmann::ordered_json;
using namespace valence;

std::string fixture_path(const std::string& name) { return std::string(VALENCE_TEST_FIXTURES) + "/" + name; }
std::string asset_path(const std::string& name) { return std::string(VALENCE_ASSET_DIR) + "/" + name; }

namespace {

Scenario parse_or_throw(const std::string& text) {
    auto r = parse_scenario(text);
    if (!r.value) {
        std::string msg = "fixture scenario failed to parse:";
        for (const auto& d : r.diagnostics) msg += "\n  " + format_diagnostic(d);
        throw std::runtime_error(msg);
    }
    return std::move(*r.value);
}

}  // namespace

const Scenario& reduced_firefight() {
    static const Scenario s = [] {
        auto doc = ordered_json::parse(builtin_firefight_document());
        doc["name"] = "firefight-reduced";
        doc["variables"][1]["levels"] = {"0", "1", "2"};
        doc["initial_state"]["occupancy"] = "2";
        return parse_or_throw(doc.dump());
    }();
    return s;
}

const Scenario& chain_scenario() {
    static const Scenario s = [] {
        auto text = read_text_file(fixture_path("chain.scenario.json"));
        if (!text) throw std::runtime_error("missing chain fixture");
        return parse_or_throw(*text);
    }();
    return s;
}

// ---- random scenarios ----

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::string comparison(std::mt19937_64& rng, const std::vector<int>& sizes) {
    static const char* ops[] = {"==", "!=", "<", "<=", ">", ">="};
    int v = uniform(rng, 0, static_cast<int>(sizes.size()) - 1);
    int level = uniform(rng, 0, sizes[static_cast<std::size_t>(v)] - 1);
    return "v" + std::to_string(v) + " " + ops[uniform(rng, 0, 5)] + " " + std::to_string(level);
}

std::string guard(std::mt19937_64& rng, const std::vector<int>& sizes) {
    std::string g = comparison(rng, sizes);
    if (coin(rng, 0.3)) g += (coin(rng, 0.5) ? " and " : " or ") + comparison(rng, sizes);
    return g;
}

double grid_score(std::mt19937_64& rng) { return uniform(rng, -10, 10) / 10.0; }

}  // namespace

std::string random_scenario_document(std::mt19937_64& rng, const RandomScenarioOptions& o) {
    std::vector<int> sizes;
    for (;;) {
        sizes.clear();
        int n = uniform(rng, 2, 3);
        int product = 1;
        for (int i = 0; i < n; ++i) {
            sizes.push_back(uniform(rng, 2, 6));
            product *= sizes.back();
        }
        if (product <= o.max_states) break;
    }
    ordered_json doc;
    doc["format_version"] = 1;
    doc["name"] = "random";
    ordered_json vars = ordered_json::array();
    ordered_json initial = ordered_json::object();
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        ordered_json levels = ordered_json::array();
        for (int l = 0; l < sizes[i]; ++l) levels.push_back("L" + std::to_string(l));
        vars.push_back({{"name", "v" + std::to_string(i)}, {"levels", levels}});
        initial["v" + std::to_string(i)] = "L" + std::to_string(uniform(rng, 0, sizes[i] - 1));
    }
    doc["variables"] = vars;
    doc["initial_state"] = initial;

    auto effects = [&] {
        ordered_json list = ordered_json::array();
        int n = uniform(rng, 1, 3);
        for (int e = 0; e < n; ++e) {
            ordered_json rule;
            if (e > 0 && coin(rng, 0.6)) rule["when"] = guard(rng, sizes);
            int v = uniform(rng, 0, static_cast<int>(sizes.size()) - 1);
            ordered_json a;
            a["variable"] = "v" + std::to_string(v);
            switch (uniform(rng, 0, 2)) {
                case 0: a["set"] = "L" + std::to_string(uniform(rng, 0, sizes[static_cast<std::size_t>(v)] - 1)); break;
                case 1: a["increment"] = uniform(rng, 1, 2); break;
                default: a["decrement"] = uniform(rng, 1, 2); break;
            }
            rule["assign"] = ordered_json::array({a});
            list.push_back(rule);
        }
        return list;
    };

    int n_actions = uniform(rng, 2, o.max_actions);
    ordered_json actions = ordered_json::array();
    for (int a = 0; a < n_actions; ++a) {
        ordered_json act;
        act["name"] = "a" + std::to_string(a);
        // The first action is always applicable so most states have a move.
        if (a > 0 && o.allow_applicability && coin(rng, 0.25)) act["applicable"] = guard(rng, sizes);
        if (o.allow_stochastic && coin(rng, 0.35)) {
            static const std::array<std::array<const char*, 3>, 4> splits = {{
                {"1/2", "1/2", nullptr},
                {"1/3", "2/3", nullptr},
                {"3/10", "7/10", nullptr},
                {"1/4", "1/4", "1/2"},
            }};
            const auto& split = splits[static_cast<std::size_t>(uniform(rng, 0, 3))];
            ordered_json outcomes = ordered_json::array();
            for (const char* p : split)
                if (p) outcomes.push_back({{"probability", p}, {"effects", effects()}});
            act["outcomes"] = outcomes;
        } else {
            act["effects"] = effects();
        }
        actions.push_back(act);
    }
    doc["actions"] = actions;

    int n_values = uniform(rng, o.min_values, o.max_values);
    ordered_json values = ordered_json::array();
    for (int v = 0; v < n_values; ++v) {
        ordered_json rules = ordered_json::object();
        for (int a = 0; a < n_actions; ++a) {
            ordered_json rs;
            ordered_json cases = ordered_json::array();
            int n_cases = uniform(rng, 0, 2);
            for (int c = 0; c < n_cases; ++c) {
                ordered_json cj;
                cj["when"] = guard(rng, sizes);
                if (coin(rng, 0.2)) {
                    int var = uniform(rng, 0, static_cast<int>(sizes.size()) - 1);
                    cj["score"] = "0.5 - 0.25 * v" + std::to_string(var);  // clamps for large levels
                } else {
                    cj["score"] = grid_score(rng);
                }
                cases.push_back(cj);
            }
            if (!cases.empty()) rs["cases"] = cases;
            rs["default"] = grid_score(rng);
            rules["a" + std::to_string(a)] = rs;
        }
        values.push_back({{"name", "V" + std::to_string(v)}, {"rules", rules}});
    }
    doc["values"] = values;

    ordered_json terminals = ordered_json::array();
    int n_terms = uniform(rng, 1, 2);
    for (int t = 0; t < n_terms; ++t) {
        int v = uniform(rng, 0, static_cast<int>(sizes.size()) - 1);
        std::string cond = "v" + std::to_string(v) + " == " + std::to_string(uniform(rng, 0, sizes[static_cast<std::size_t>(v)] - 1));
        if (coin(rng, 0.3)) cond += " and " + comparison(rng, sizes);
        terminals.push_back({{"when", cond}, {"label", t == 0 ? "success" : "failure"}});
    }
    doc["terminals"] = terminals;
    return doc.dump(2);
}

Scenario random_scenario(std::mt19937_64& rng, const RandomScenarioOptions& options) {
    return parse_or_throw(random_scenario_document(rng, options));
}

bool is_deterministic(const Scenario& scenario) {
    return std::all_of(scenario.actions.begin(), scenario.actions.end(),
                       [](const ActionDef& a) { return a.outcomes.size() == 1; });
}

std::string random_protocol_document(std::mt19937_64& rng, const Scenario& scenario) {
    static const char* modalities[] = {"permit", "forbid", "oblige"};
    std::vector<int> sizes;
    for (const auto& v : scenario.variables) sizes.push_back(static_cast<int>(v.size()));
    ordered_json doc;
    doc["format_version"] = 1;
    doc["name"] = "random-protocol";
    doc["stance"] = coin(rng, 0.75) ? "permissive" : "restrictive";
    ordered_json rules = ordered_json::array();
    int n = uniform(rng, 0, 5);
    for (int i = 0; i < n; ++i) {
        ordered_json r;
        r["action"] = scenario.actions[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(scenario.actions.size()) - 1))].name;
        r["modality"] = modalities[uniform(rng, 0, 2)];
        if (coin(rng, 0.7)) {
            int v = uniform(rng, 0, static_cast<int>(sizes.size()) - 1);
            static const char* ops[] = {"==", "!=", "<=", ">="};
            r["when"] = scenario.variables[static_cast<std::size_t>(v)].name + " " + ops[uniform(rng, 0, 3)] + " " +
                        std::to_string(uniform(rng, 0, sizes[static_cast<std::size_t>(v)] - 1));
        }
        if (coin(rng, 0.3)) r["priority"] = uniform(rng, 0, 2);
        rules.push_back(r);
    }
    doc["rules"] = rules;
    return doc.dump(2);
}

// ---- oracles ----

ParetoSet nd_filter(std::vector<ValueVector> vectors, double tol) {
    auto covers = [tol](const ValueVector& w, const ValueVector& v) {
        for (std::size_t k = 0; k < v.size(); ++k)
            if (w[k] < v[k] - tol) return false;
        return true;
    };
    auto close = [tol](const ValueVector& w, const ValueVector& v) {
        for (std::size_t k = 0; k < v.size(); ++k)
            if (std::abs(w[k] - v[k]) > tol) return false;
        return true;
    };
    std::sort(vectors.begin(), vectors.end(), std::greater<>());
    // Exact filter first so the quadratic pass below stays small.
    ParetoSet exact;
    for (const auto& v : vectors) {
        bool hit = false;
        for (const auto& w : exact)
            if ((hit = std::equal(w.begin(), w.end(), v.begin(), std::greater_equal<>()))) break;
        if (!hit) exact.push_back(v);
    }
    ParetoSet distinct;
    for (const auto& v : exact) {
        bool dup = false;
        for (const auto& w : distinct) dup = dup || close(w, v);
        if (!dup) distinct.push_back(v);
    }
    ParetoSet kept;
    for (std::size_t i = 0; i < distinct.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < distinct.size() && !dominated; ++j)
            dominated = i != j && covers(distinct[j], distinct[i]);
        if (!dominated) kept.push_back(distinct[i]);
    }
    return kept;
}

namespace {

struct Table {
    std::size_t values = 0;
    std::vector<bool> terminal;
    // per state, per available action: reward and successors (index, prob)
    struct Move {
        ValueVector reward;
        std::vector<std::pair<std::size_t, double>> next;
    };
    std::vector<std::vector<Move>> moves;
};

Table build_table(const Scenario& sc) {
    Table t;
    t.values = sc.values.size();
    std::size_t n = sc.state_count();
    t.terminal.resize(n);
    t.moves.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        StateVector s = sc.state_at(i);
        t.terminal[i] = is_terminal(sc, s).has_value();
        if (t.terminal[i]) continue;
        for (int a : available_actions(sc, s)) {
            Table::Move m;
            std::map<std::size_t, Rational> merged;
            for (const auto& [p, out] : successor_distribution(sc, s, a)) {
                if (m.reward.empty()) m.reward = out.alignment;
                merged[sc.index_of(out.next_state)] += p;
            }
            for (const auto& [j, p] : merged) m.next.emplace_back(j, p.to_double());
            t.moves[i].push_back(std::move(m));
        }
    }
    return t;
}

}  // namespace

ParetoSet enumerate_front(const Scenario& sc, const StateVector& start, int horizon, double gamma) {
    if (!is_deterministic(sc)) throw std::invalid_argument("enumerate_front needs a deterministic scenario");
    Table t = build_table(sc);
    std::vector<ValueVector> returns;
    ValueVector acc(t.values, 0.0);
    std::function<void(std::size_t, int, double)> walk = [&](std::size_t s, int depth, double discount) {
        if (t.terminal[s] || depth == horizon || t.moves[s].empty()) {
            returns.push_back(acc);
            return;
        }
        for (const auto& m : t.moves[s]) {
            ValueVector saved = acc;
            for (std::size_t k = 0; k < t.values; ++k) acc[k] += discount * m.reward[k];
            walk(m.next.front().first, depth + 1, discount * gamma);
            acc = std::move(saved);
        }
    };
    walk(sc.index_of(start), 0, 1.0);
    return nd_filter(std::move(returns));
}

ParetoSet recursive_front(const Scenario& sc, const StateVector& start, int horizon, double gamma) {
    Table t = build_table(sc);
    std::map<std::pair<std::size_t, int>, ParetoSet> memo;
    std::function<const ParetoSet&(std::size_t, int)> front = [&](std::size_t s, int h) -> const ParetoSet& {
        auto key = std::make_pair(s, h);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        ParetoSet result;
        if (t.terminal[s] || h == 0 || t.moves[s].empty()) {
            result.push_back(ValueVector(t.values, 0.0));
        } else {
            std::vector<ValueVector> all;
            for (const auto& m : t.moves[s]) {
                std::vector<ValueVector> partial{m.reward};
                for (const auto& [next, p] : m.next) {
                    const ParetoSet& sub = front(next, h - 1);
                    std::vector<ValueVector> grown;
                    for (const auto& x : partial)
                        for (const auto& y : sub) {
                            ValueVector z = x;
                            for (std::size_t k = 0; k < t.values; ++k) z[k] += gamma * p * y[k];
                            grown.push_back(std::move(z));
                        }
                    partial = nd_filter(std::move(grown));
                }
                all.insert(all.end(), partial.begin(), partial.end());
            }
            result = nd_filter(std::move(all));
        }
        return memo.emplace(key, std::move(result)).first->second;
    };
    return front(sc.index_of(start), horizon);
}

bool same_set(const ParetoSet& a, const ParetoSet& b, double tol) {
    auto covered = [tol](const ParetoSet& x, const ParetoSet& y) {
        for (const auto& u : x) {
            bool found = false;
            for (const auto& v : y) {
                double d = 0;
                for (std::size_t k = 0; k < u.size(); ++k) d = std::max(d, std::abs(u[k] - v[k]));
                if (d <= tol) {
                    found = true;
                    break;
                }
            }
            if (!found) return false;
        }
        return true;
    };
    return a.size() == b.size() && covered(a, b) && covered(b, a);
}

// ---- hand-written firefighting dynamics ----

int hand_terminal(const HandState& s) {
    if (s.health == 0) return 2;
    if (s.fire == 0 && s.occupancy == 0) return 1;
    return 0;
}

HandState hand_step(const HandState& s, int action) {
    HandState n = s;
    auto hurt = [&] {
        int loss = 0;
        if (s.knowledge == 0 || s.equipment == 0) ++loss;
        if (s.fire >= 2) ++loss;
        n.health = std::max(0, n.health - loss);
        if (s.fire == 4) n.equipment = 0;
    };
    switch (action) {
        case kEvacuate:
            n.occupancy = std::max(0, s.occupancy - 1);
            hurt();
            break;
        case kContain: n.fire = std::max(0, s.fire - 1); break;
        case kAggressive:
            n.fire = std::max(0, s.fire - 2);
            hurt();
            break;
        case kPrepare: n.equipment = 1; break;
        case kUpdate: n.knowledge = 1; break;
        default: throw std::invalid_argument("bad action");
    }
    return n;
}

std::array<double, 2> hand_alignment(const HandState& s, int action) {
    switch (action) {
        case kEvacuate:
            if (s.occupancy == 0) return {-1, -1};
            return {1 - 0.5 * (s.fire / 4.0) - 0.5 * (1 - s.knowledge), 1};
        case kContain:
            if (s.fire == 0) return {-1, -1};
            return {0.8, 0.2};
        case kAggressive:
            if (s.fire == 0) return {-1, -1};
            return {s.equipment == 0 ? 0.3 : 0.6, 0.5};
        case kPrepare:
            if (s.equipment == 1) return {-1, -1};
            return {0.5, -0.1};
        case kUpdate:
            if (s.knowledge == 1) return {-1, -1};
            return {1, -0.5};
        default: throw std::invalid_argument("bad action");
    }
}

ParetoSet hand_front(const HandState& start, int horizon) {
    std::vector<ValueVector> returns;
    std::function<void(const HandState&, int, double, double)> walk = [&](const HandState& s, int depth, double p,
                                                                          double q) {
        if (hand_terminal(s) != 0 || depth == horizon) {
            returns.push_back({p, q});
            return;
        }
        for (int a = 0; a < 5; ++a) {
            auto r = hand_alignment(s, a);
            walk(hand_step(s, a), depth + 1, p + r[0], q + r[1]);
        }
    };
    walk(start, 0, 0.0, 0.0);
    return nd_filter(std::move(returns));
}

double hypervolume_oracle(const ParetoSet& front, const ValueVector& reference) {
    std::size_t n = front.size();
    if (n > 20) throw std::invalid_argument("hypervolume_oracle: front too large");
    double total = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        ValueVector corner(reference.size(), INFINITY);
        int bits = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                ++bits;
                for (std::size_t k = 0; k < reference.size(); ++k) corner[k] = std::min(corner[k], front[i][k]);
            }
        double vol = 1;
        for (std::size_t k = 0; k < reference.size(); ++k) vol *= std::max(0.0, corner[k] - reference[k]);
        total += (bits % 2 ? 1 : -1) * vol;
    }
    return total;
}

std::vector<ValueVector> random_points(std::mt19937_64& rng, std::size_t n, std::size_t dims) {
    std::vector<ValueVector> out(n, ValueVector(dims));
    for (auto& v : out)
        for (auto& x : v) x = uniform(rng, -20, 20) * 0.25;
    return out;
}

}  // namespace testsupport
