#include "valence/front_io.hpp"

#include <algorithm>

#include "json_locator.hpp"

namespace valence {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json vector_json(const ValueVector& v) {
    ordered_json out = ordered_json::array();
    for (double x : v) out.push_back(x == 0.0 ? 0.0 : x);
    return out;
}

ordered_json state_json(const std::vector<VariableDef>& variables, const StateVector& state) {
    ordered_json out = ordered_json::object();
    for (std::size_t i = 0; i < variables.size(); ++i)
        out[variables[i].name] = variables[i].levels.at(static_cast<std::size_t>(state[i]));
    return out;
}

std::string serialize_front(const SolutionFront& sol) {
    ordered_json root;
    root["format_version"] = kFrontFormatVersion;
    root["scenario"] = {{"name", sol.scenario_name}, {"hash", sol.scenario_hash}};
    ordered_json vars = ordered_json::array();
    for (const auto& v : sol.variables) vars.push_back({{"name", v.name}, {"levels", v.levels}});
    root["variables"] = std::move(vars);
    root["actions"] = sol.action_names;
    root["values"] = sol.value_names;
    root["config"] = {{"gamma", sol.config.gamma},
                      {"horizon", sol.config.horizon},
                      {"epsilon", sol.config.epsilon},
                      {"tau", sol.config.tau},
                      {"max_vectors", sol.config.max_vectors}};
    root["termination"] = std::string(to_string(sol.termination));
    root["approximate"] = sol.approximate;
    root["residual"] = sol.residual;

    // Entry: [value, action, links]; link: [state, index] or
    // [state, index, probability] when the probability is not 1.
    std::string layers = "[";
    for (std::size_t k = 0; k < sol.layers.size(); ++k) {
        ordered_json layer = ordered_json::array();
        for (const auto& entries : sol.layers[k].states) {
            ordered_json st = ordered_json::array();
            for (const auto& e : entries) {
                ordered_json links = ordered_json::array();
                for (const auto& l : e.links) {
                    if (l.probability == 1.0) links.push_back({l.state, l.index});
                    else links.push_back({l.state, l.index, l.probability});
                }
                st.push_back({vector_json(e.value), e.action, std::move(links)});
            }
            layer.push_back(std::move(st));
        }
        layers += (k ? ",\n    " : "\n    ") + layer.dump();
    }
    layers += "\n  ]";
    // One line per layer keeps the file diffable without exploding it.
    root["layers"] = "@LAYERS@";
    std::string text = root.dump(2);
    auto at = text.find("\"@LAYERS@\"");
    text.replace(at, 10, layers);
    return text + "\n";
}

namespace {

struct FrontFormatError : std::runtime_error {
    std::string pointer;
    FrontFormatError(const std::string& m, std::string p) : std::runtime_error(m), pointer(std::move(p)) {}
};

void require(bool ok, const std::string& message, const std::string& pointer) {
    if (!ok) throw FrontFormatError(message, pointer);
}

}  // namespace

ParseResult<SolutionFront> parse_front(std::string_view text) {
    ParseResult<SolutionFront> result;
    auto parsed = detail::parse_located(text);
    if (auto* d = std::get_if<Diagnostic>(&parsed)) {
        result.diagnostics.push_back(*d);
        return result;
    }
    const auto& doc = std::get<detail::LocatedJson>(parsed);
    const json& root = doc.value;
    try {
        SolutionFront sol;
        require(root.is_object(), "expected an object", "");
        require(root.value("format_version", 0) == kFrontFormatVersion, "unsupported format_version", "/format_version");
        sol.scenario_name = root.at("scenario").at("name").get<std::string>();
        sol.scenario_hash = root.at("scenario").at("hash").get<std::string>();
        for (const auto& v : root.at("variables"))
            sol.variables.push_back({v.at("name").get<std::string>(), v.at("levels").get<std::vector<std::string>>()});
        sol.action_names = root.at("actions").get<std::vector<std::string>>();
        sol.value_names = root.at("values").get<std::vector<std::string>>();
        const json& c = root.at("config");
        sol.config.gamma = c.at("gamma").get<double>();
        sol.config.horizon = c.at("horizon").get<int>();
        sol.config.epsilon = c.at("epsilon").get<double>();
        sol.config.tau = c.at("tau").get<double>();
        sol.config.max_vectors = c.at("max_vectors").get<std::size_t>();
        std::string term = root.at("termination").get<std::string>();
        if (term == "converged") sol.termination = SolveTermination::converged;
        else if (term == "horizon") sol.termination = SolveTermination::horizon;
        else if (term == "not-converged") sol.termination = SolveTermination::not_converged;
        else require(false, "unknown termination '" + term + "'", "/termination");
        sol.approximate = root.at("approximate").get<bool>();
        sol.residual = root.at("residual").get<double>();

        std::size_t n = sol.state_count();
        std::size_t dims = sol.value_names.size();
        const json& layers = root.at("layers");
        require(layers.is_array() && !layers.empty(), "layers must be a non-empty array", "/layers");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            std::string lp = "/layers/" + std::to_string(k);
            require(layers[k].is_array() && layers[k].size() == n, "layer must list every state", lp);
            SolutionFront::Layer layer;
            layer.states.resize(n);
            for (std::size_t s = 0; s < n; ++s) {
                const json& entries = layers[k][s];
                std::string sp = lp + "/" + std::to_string(s);
                require(entries.is_array() && !entries.empty(), "state entry list must be non-empty", sp);
                for (std::size_t i = 0; i < entries.size(); ++i) {
                    std::string ep = sp + "/" + std::to_string(i);
                    const json& e = entries[i];
                    require(e.is_array() && e.size() == 3, "entry must be [value, action, links]", ep);
                    SolutionFront::Entry entry;
                    entry.value = e[0].get<ValueVector>();
                    entry.action = e[1].get<int>();
                    require(entry.value.size() == dims, "vector has the wrong dimension", ep);
                    require(entry.action >= -1 && entry.action < static_cast<int>(sol.action_names.size()),
                            "action index out of range", ep);
                    for (const auto& l : e[2]) {
                        SolutionFront::Link link;
                        link.state = l.at(0).get<std::uint32_t>();
                        link.index = l.at(1).get<std::uint32_t>();
                        if (l.size() > 2) link.probability = l.at(2).get<double>();
                        require(k > 0 && link.state < n && link.index < sol.layers[k - 1].states[link.state].size(),
                                "link points outside the previous layer", ep);
                        entry.links.push_back(link);
                    }
                    layer.states[s].push_back(std::move(entry));
                }
            }
            sol.layers.push_back(std::move(layer));
        }
        result.value = std::move(sol);
    } catch (const FrontFormatError& e) {
        result.diagnostics.push_back({Severity::error, "front-format", e.what(), doc.map.locate(e.pointer)});
    } catch (const json::exception& e) {
        std::string msg = e.what();
        if (auto pos = msg.find("] "); pos != std::string::npos) msg = msg.substr(pos + 2);
        result.diagnostics.push_back({Severity::error, "front-format", msg, doc.map.locate("")});
    }
    return result;
}

ordered_json front_summary(const SolutionFront& sol, const StateVector& start) {
    ordered_json out;
    out["scenario"] = {{"name", sol.scenario_name}, {"hash", sol.scenario_hash}};
    out["gamma"] = sol.config.gamma;
    out["horizon"] = sol.config.horizon;
    out["termination"] = std::string(to_string(sol.termination));
    out["approximate"] = sol.approximate;
    out["sweeps"] = sol.sweeps();
    out["values"] = sol.value_names;
    out["start"] = state_json(sol.variables, start);
    ParetoSet front = sol.front(start);
    ordered_json vecs = ordered_json::array();
    for (const auto& v : front) vecs.push_back(vector_json(v));
    out["front"] = std::move(vecs);
    out["size"] = front.size();
    ordered_json maxima = ordered_json::object();
    for (std::size_t d = 0; d < sol.value_names.size(); ++d) {
        double best = front.front()[d];
        for (const auto& v : front) best = std::max(best, v[d]);
        maxima[sol.value_names[d]] = best == 0.0 ? 0.0 : best;
    }
    out["maxima"] = std::move(maxima);
    return out;
}

}  // namespace valence
