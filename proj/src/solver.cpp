#include "valence/solver.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>

#include "valence/scenario_io.hpp"

namespace valence {

std::string SolveConfig::check() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) return "gamma must lie in (0, 1]";
    if (horizon < 0) return "horizon must be positive, or 0 for unbounded";
    if (horizon == 0 && gamma >= 1.0) return "an unbounded horizon requires gamma < 1";
    if (!(epsilon >= 0.0) || !(tau >= 0.0)) return "tolerances must be non-negative";
    if (max_sweeps < 1) return "max_sweeps must be positive";
    return {};
}

std::string_view to_string(SolveTermination t) {
    switch (t) {
        case SolveTermination::converged: return "converged";
        case SolveTermination::horizon: return "horizon";
        case SolveTermination::not_converged: return "not-converged";
    }
    return "?";
}

std::string format_vector(const ValueVector& v) {
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        char buf[64];
        double x = v[i] == 0.0 ? 0.0 : v[i];  // no "-0"
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
        out.append(buf, p);
    }
    return out + ")";
}

std::size_t SolutionFront::state_count() const {
    std::size_t n = 1;
    for (const auto& v : variables) n *= static_cast<std::size_t>(v.size());
    return n;
}

std::size_t SolutionFront::index_of(const StateVector& state) const {
    if (state.size() != variables.size()) throw ContractViolation("state does not match the solved scenario");
    std::size_t index = 0;
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (state[i] < 0 || state[i] >= variables[i].size())
            throw ContractViolation("state does not match the solved scenario");
        index = index * static_cast<std::size_t>(variables[i].size()) + static_cast<std::size_t>(state[i]);
    }
    return index;
}

StateVector SolutionFront::state_at(std::size_t index) const {
    std::vector<int> levels(variables.size());
    for (std::size_t i = variables.size(); i-- > 0;) {
        auto n = static_cast<std::size_t>(variables[i].size());
        levels[i] = static_cast<int>(index % n);
        index /= n;
    }
    return StateVector(std::move(levels));
}

const std::vector<SolutionFront::Entry>& SolutionFront::entries(const StateVector& state) const {
    return layers.back().states.at(index_of(state));
}

ParetoSet SolutionFront::front(const StateVector& state) const {
    ParetoSet out;
    for (const auto& e : entries(state)) out.push_back(e.value);
    return out;
}

std::string SolutionFront::describe(const StateVector& state) const {
    std::string out = "(";
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (i) out += ", ";
        out += variables[i].levels.at(static_cast<std::size_t>(state[i]));
    }
    return out + ")";
}

namespace {

struct Successor {
    double probability;
    std::uint32_t state;
};

struct Choice {
    int action;
    ValueVector reward;
    std::vector<Successor> successors;  // merged by state, ascending
};

// Precomputed one-step model: per state, the allowed actions with their
// rewards and successor distributions.
std::vector<std::vector<Choice>> build_model(const Scenario& scenario, const ActionFilter& filter,
                                             std::vector<bool>& terminal) {
    std::size_t n = scenario.state_count();
    std::vector<std::vector<Choice>> model(n);
    terminal.assign(n, false);
    for (std::size_t s = 0; s < n; ++s) {
        StateVector state = scenario.state_at(s);
        if (is_terminal(scenario, state)) {
            terminal[s] = true;
            continue;
        }
        std::vector<int> actions = filter ? filter(state) : available_actions(scenario, state);
        for (int a : actions) {
            Choice c;
            c.action = a;
            c.reward = alignment_vector(scenario, state, a);
            std::map<std::uint32_t, Rational> merged;
            for (auto& [p, outcome] : successor_distribution(scenario, state, a)) {
                auto idx = static_cast<std::uint32_t>(scenario.index_of(outcome.next_state));
                merged[idx] += p;
            }
            for (auto& [idx, p] : merged) c.successors.push_back({p.to_double(), idx});
            model[s].push_back(std::move(c));
        }
    }
    return model;
}

struct Candidate {
    ValueVector value;
    int action;
    std::vector<SolutionFront::Link> links;
};

// Keeps the non-dominated candidates, in lexicographically descending order.
std::vector<Candidate> prune_candidates(std::vector<Candidate> cands, double tau) {
    std::vector<ValueVector> values;
    values.reserve(cands.size());
    for (const auto& c : cands) values.push_back(c.value);
    std::vector<Candidate> out;
    for (std::size_t i : pareto_prune_indices(values, tau)) out.push_back(std::move(cands[i]));
    return out;
}

// All non-dominated r + gamma * sum_j p_j v_j with one v_j per successor.
// Partial sums are pruned after each successor; a dominated partial sum
// cannot complete to a non-dominated total.
std::vector<Candidate> backup(const Choice& c, const SolutionFront::Layer& prev, double gamma, double tau) {
    std::vector<Candidate> partial{Candidate{c.reward, c.action, {}}};
    for (const auto& succ : c.successors) {
        const auto& options = prev.states[succ.state];
        std::vector<Candidate> next;
        next.reserve(partial.size() * options.size());
        double w = gamma * succ.probability;
        for (const auto& p : partial) {
            for (std::size_t j = 0; j < options.size(); ++j) {
                Candidate cand = p;
                for (std::size_t i = 0; i < cand.value.size(); ++i) cand.value[i] += w * options[j].value[i];
                cand.links.push_back({succ.state, static_cast<std::uint32_t>(j), succ.probability});
                next.push_back(std::move(cand));
            }
        }
        partial = c.successors.size() > 1 ? prune_candidates(std::move(next), tau) : std::move(next);
    }
    return partial;
}

}  // namespace

SolutionFront pmovi(const Scenario& scenario, const SolveConfig& config, const ActionFilter& filter) {
    if (auto why = config.check(); !why.empty()) throw ContractViolation("invalid solve config: " + why);

    SolutionFront sol;
    sol.scenario_name = scenario.name;
    sol.scenario_hash = scenario_hash(scenario);
    sol.variables = scenario.variables;
    for (const auto& a : scenario.actions) sol.action_names.push_back(a.name);
    for (const auto& v : scenario.values) sol.value_names.push_back(v.name);
    sol.config = config;

    std::vector<bool> terminal;
    auto model = build_model(scenario, filter, terminal);
    std::size_t n = model.size();
    std::size_t dims = scenario.values.size();

    SolutionFront::Layer zero;
    zero.states.assign(n, {SolutionFront::Entry{ValueVector(dims, 0.0), -1, {}}});
    sol.layers.push_back(std::move(zero));

    int limit = config.horizon > 0 ? config.horizon : config.max_sweeps;
    for (int k = 1; k <= limit; ++k) {
        const auto& prev = sol.layers.back();
        SolutionFront::Layer layer;
        layer.states.resize(n);
        double residual = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            auto& out = layer.states[s];
            if (terminal[s] || model[s].empty()) {
                out.push_back(SolutionFront::Entry{ValueVector(dims, 0.0), -1, {}});
                continue;
            }
            std::vector<Candidate> cands;
            for (const auto& choice : model[s]) {
                auto part = backup(choice, prev, config.gamma, config.tau);
                std::move(part.begin(), part.end(), std::back_inserter(cands));
            }
            cands = prune_candidates(std::move(cands), config.tau);
            if (config.max_vectors > 0 && cands.size() > config.max_vectors) {
                std::vector<ValueVector> values;
                for (const auto& c : cands) values.push_back(c.value);
                std::vector<Candidate> kept;
                for (std::size_t i : hypervolume_cap(values, config.max_vectors)) kept.push_back(std::move(cands[i]));
                cands = std::move(kept);
                sol.approximate = true;
            }
            for (auto& c : cands) out.push_back({std::move(c.value), c.action, std::move(c.links)});

            std::vector<ValueVector> a, b;
            for (const auto& e : out) a.push_back(e.value);
            for (const auto& e : prev.states[s]) b.push_back(e.value);
            residual = std::max(residual, hausdorff_distance(a, b));
        }
        sol.layers.push_back(std::move(layer));
        sol.residual = residual;
        if (residual <= config.epsilon) {
            sol.termination = SolveTermination::converged;
            return sol;
        }
    }
    sol.termination = config.gamma < 1.0 ? SolveTermination::not_converged : SolveTermination::horizon;
    return sol;
}

std::vector<std::pair<StateVector, int>> PolicyTrace::path() const {
    std::vector<std::pair<StateVector, int>> out;
    if (nodes.empty()) return out;
    int at = 0;
    while (true) {
        const auto& node = nodes[static_cast<std::size_t>(at)];
        if (node.action < 0) break;
        out.emplace_back(node.state, node.action);
        if (node.children.empty()) break;
        auto best = std::max_element(node.children.begin(), node.children.end(),
                                     [](const auto& x, const auto& y) { return x.first < y.first; });
        at = best->second;
    }
    return out;
}

PolicyTrace extract_policy(const SolutionFront& solution, const StateVector& start, const ValueVector& target) {
    const auto& entries = solution.entries(start);
    std::size_t pick = entries.size();
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].value.size() != target.size()) throw ContractViolation("target has the wrong dimension");
        double d = linf_distance(entries[i].value, target);
        if (d < best || (d == best && lex_greater(entries[i].value, entries[nearest].value))) {
            best = d;
            nearest = i;
        }
    }
    if (best <= solution.config.tau) pick = nearest;
    if (pick == entries.size())
        throw FrontLookupError("target " + format_vector(target) + " is not on the front at " +
                                   solution.describe(start) + "; nearest member is " +
                                   format_vector(entries[nearest].value),
                               entries[nearest].value);

    PolicyTrace trace;
    trace.target = target;
    // Explicit stack of (layer, state index, entry index, node id).
    struct Item {
        std::size_t layer;
        std::size_t state;
        std::size_t entry;
        int node;
    };
    trace.nodes.push_back({start, -1, {}, {}});
    std::vector<Item> stack{{solution.layers.size() - 1, solution.index_of(start), pick, 0}};
    while (!stack.empty()) {
        Item it = stack.back();
        stack.pop_back();
        const auto& e = solution.layers[it.layer].states[it.state][it.entry];
        auto& node = trace.nodes[static_cast<std::size_t>(it.node)];
        node.value = e.value;
        node.action = e.action;
        if (e.action < 0) continue;
        std::vector<std::pair<double, int>> children;
        for (const auto& link : e.links) {
            int id = static_cast<int>(trace.nodes.size());
            trace.nodes.push_back({solution.state_at(link.state), -1, {}, {}});
            children.emplace_back(link.probability, id);
            stack.push_back({it.layer - 1, link.state, link.index, id});
        }
        trace.nodes[static_cast<std::size_t>(it.node)].children = std::move(children);
    }
    return trace;
}

ValueVector trace_return(const Scenario& scenario, const PolicyTrace& trace, double gamma) {
    std::size_t dims = scenario.values.size();
    if (trace.nodes.empty()) return ValueVector(dims, 0.0);
    // Children are created after their parent, so a reverse sweep sees every
    // child before its parent.
    std::vector<ValueVector> ret(trace.nodes.size(), ValueVector(dims, 0.0));
    for (std::size_t i = trace.nodes.size(); i-- > 0;) {
        const auto& node = trace.nodes[i];
        if (node.action < 0) continue;
        ValueVector r = alignment_vector(scenario, node.state, node.action);
        auto dist = successor_distribution(scenario, node.state, node.action);
        for (const auto& [p_unused, child] : node.children) {
            const auto& cs = trace.nodes[static_cast<std::size_t>(child)].state;
            Rational p(0);
            for (const auto& [q, outcome] : dist)
                if (outcome.next_state == cs) p += q;
            for (std::size_t d = 0; d < dims; ++d) r[d] += gamma * p.to_double() * ret[static_cast<std::size_t>(child)][d];
        }
        ret[i] = std::move(r);
    }
    return ret[0];
}

}  // namespace valence
