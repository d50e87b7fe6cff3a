#include "valence/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include <pthread.h>

#include <CLI11.hpp>

#include "valence/assessment.hpp"
#include "valence/front_io.hpp"
#include "valence/protocol.hpp"
#include "valence/scenario_io.hpp"
#include "valence/service.hpp"
#include "valence/solver.hpp"
#include "valence/trajectory.hpp"

#ifndef VALENCE_ASSET_DIR
#define VALENCE_ASSET_DIR "assets"
#endif

namespace valence {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Ctx {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
    bool json = false;
};

void emit_error(Ctx& c, const std::string& code, const std::string& message, ordered_json extra = {}) {
    if (c.json) {
        ordered_json j;
        j["severity"] = "error";
        j["code"] = code;
        j["message"] = message;
        if (extra.is_object())
            for (auto& [k, v] : extra.items()) j[k] = v;
        c.err << j.dump() << "\n";
    } else {
        c.err << "error: " << message << "\n";
    }
}

void emit_warning(Ctx& c, const std::string& code, const std::string& message) {
    if (c.json)
        c.err << ordered_json{{"severity", "warning"}, {"code", code}, {"message", message}}.dump() << "\n";
    else
        c.err << "warning: " << message << "\n";
}

void emit_diagnostics(Ctx& c, const std::vector<Diagnostic>& diags, const std::string& file) {
    for (const auto& d : diags) {
        if (c.json) {
            ordered_json j;
            j["severity"] = d.severity == Severity::error ? "error" : "warning";
            j["code"] = d.code;
            j["message"] = d.message;
            j["file"] = file;
            j["line"] = d.location.line;
            j["column"] = d.location.column;
            j["path"] = d.location.path;
            c.err << j.dump() << "\n";
        } else {
            c.err << format_diagnostic(d, file) << "\n";
        }
    }
}

struct Loaded {
    std::optional<Scenario> scenario;
    int status = kExitOk;
};

/// A path, or the name of a shipped scenario ("firefight", "firefight-stochastic").
Loaded load_scenario(Ctx& c, const std::string& arg) {
    std::string path = arg;
    if (!fs::is_regular_file(path)) {
        if (arg == "firefight") return {builtin_firefight(), kExitOk};
        fs::path asset = fs::path(VALENCE_ASSET_DIR) / (arg + ".scenario.json");
        if (arg.find('/') == std::string::npos && fs::is_regular_file(asset)) {
            path = asset.string();
        } else {
            emit_error(c, "io", "cannot read scenario '" + arg + "'", {{"file", arg}});
            return {std::nullopt, kExitUsage};
        }
    }
    auto text = read_text_file(path);
    if (!text) {
        emit_error(c, "io", "cannot read scenario '" + path + "'", {{"file", path}});
        return {std::nullopt, kExitUsage};
    }
    auto parsed = parse_scenario(*text);
    emit_diagnostics(c, parsed.diagnostics, path);
    if (!parsed.value) return {std::nullopt, kExitDomain};
    return {std::move(parsed.value), kExitOk};
}

std::optional<std::string> load_text(Ctx& c, const std::string& path, const char* what) {
    auto text = read_text_file(path);
    if (!text) emit_error(c, "io", std::string("cannot read ") + what + " '" + path + "'", {{"file", path}});
    return text;
}

std::optional<ValueVector> parse_weights(const std::string& text) {
    ValueVector w;
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        double x = 0;
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), x);
        if (ec != std::errc() || p != part.data() + part.size() || !std::isfinite(x)) return std::nullopt;
        w.push_back(x);
    }
    if (w.empty()) return std::nullopt;
    return w;
}

bool write_output(Ctx& c, const std::string& path, const std::string& text) {
    if (write_text_file(path, text)) return true;
    emit_error(c, "io", "cannot write '" + path + "'", {{"file", path}});
    return false;
}

std::string state_text(const Scenario& sc, const StateVector& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < sc.variables.size(); ++i) {
        if (i) out += ", ";
        out += sc.variables[i].levels[static_cast<std::size_t>(s[i])];
    }
    return out + ")";
}

std::string value_names(const Scenario& sc) {
    std::string out;
    for (std::size_t i = 0; i < sc.values.size(); ++i) out += (i ? ", " : "") + sc.values[i].name;
    return out;
}

// ---- validate ----

int cmd_validate(Ctx& c, const std::string& path) {
    if (!fs::is_regular_file(path)) {
        emit_error(c, "io", "cannot read scenario '" + path + "'", {{"file", path}});
        return kExitUsage;
    }
    auto loaded = load_scenario(c, path);
    if (!loaded.scenario) return loaded.status;
    const Scenario& sc = *loaded.scenario;
    if (c.json) {
        ordered_json j;
        j["ok"] = true;
        j["name"] = sc.name;
        j["hash"] = scenario_hash(sc);
        j["variables"] = sc.variables.size();
        j["states"] = sc.state_count();
        j["actions"] = sc.actions.size();
        j["values"] = sc.values.size();
        c.out << j.dump(2) << "\n";
    } else {
        c.out << "OK: " << sc.variables.size() << " variables, " << sc.state_count() << " states, "
              << sc.actions.size() << " actions, " << sc.values.size() << " values\n";
    }
    return kExitOk;
}

// ---- solve ----

struct SolveArgs {
    std::string scenario;
    double gamma = 1.0;
    int horizon = 50;
    double epsilon = 1e-9;
    int max_vectors = 0;
    int max_sweeps = 2000;
    std::string output;
};

int cmd_solve(Ctx& c, const SolveArgs& a) {
    auto loaded = load_scenario(c, a.scenario);
    if (!loaded.scenario) return loaded.status;
    const Scenario& sc = *loaded.scenario;
    SolveConfig config;
    config.gamma = a.gamma;
    config.horizon = a.horizon;
    config.epsilon = a.epsilon;
    config.max_vectors = static_cast<std::size_t>(a.max_vectors);
    config.max_sweeps = a.max_sweeps;
    if (auto why = config.check(); !why.empty()) {
        emit_error(c, "usage", why);
        return kExitUsage;
    }
    SolutionFront sol = pmovi(sc, config);
    if (!a.output.empty() && !write_output(c, a.output, serialize_front(sol))) return kExitDomain;
    if (sol.approximate)
        emit_warning(c, "approximate", "front capped at " + std::to_string(a.max_vectors) + " vectors per state");
    ordered_json summary = front_summary(sol, sc.initial);
    if (c.json) {
        summary["output"] = a.output.empty() ? ordered_json(nullptr) : ordered_json(a.output);
        c.out << summary.dump(2) << "\n";
    } else {
        ParetoSet front = sol.front(sc.initial);
        c.out << "scenario: " << sc.name << " (" << sol.scenario_hash << ")\n";
        c.out << "solver: gamma " << a.gamma << ", horizon " << a.horizon << ", " << to_string(sol.termination)
              << " after " << sol.sweeps() << " sweeps, residual " << sol.residual << "\n";
        c.out << "values: " << value_names(sc) << "\n";
        c.out << "front at initial state: " << front.size() << " vectors\n";
        c.out << "front: {";
        for (std::size_t i = 0; i < front.size(); ++i) c.out << (i ? ", " : "") << format_vector(front[i]);
        c.out << "}\n";
        c.out << "maxima:";
        for (std::size_t k = 0; k < sc.values.size(); ++k) {
            double best = -INFINITY;
            for (const auto& v : front) best = std::max(best, v[k]);
            std::string num = format_vector({best});
            c.out << (k ? ", " : " ") << sc.values[k].name << " " << num.substr(1, num.size() - 2);
        }
        c.out << "\n";
        if (!a.output.empty()) c.out << "wrote " << a.output << "\n";
    }
    if (sol.termination == SolveTermination::not_converged) {
        emit_error(c, "not-converged", "value iteration did not converge (residual " + std::to_string(sol.residual) + ")");
        return kExitDomain;
    }
    return kExitOk;
}

// ---- play ----

struct PlayArgs {
    std::string scenario;
    std::uint64_t seed = 0;
    int horizon = 50;
    double gamma = 1.0;
    std::string script;
    std::string actions;
    bool reveal = false;
    std::string output;
};

std::optional<std::vector<std::string>> read_script(Ctx& c, const PlayArgs& a) {
    std::vector<std::string> out;
    if (!a.actions.empty()) {
        std::stringstream in(a.actions);
        std::string part;
        while (std::getline(in, part, ',')) out.push_back(part);
        return out;
    }
    auto text = load_text(c, a.script, "script");
    if (!text) return std::nullopt;
    auto first = text->find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (*text)[first] == '[') {
        try {
            for (const auto& x : nlohmann::json::parse(*text)) out.push_back(x.get<std::string>());
        } catch (const nlohmann::json::exception&) {
            emit_error(c, "script", "script '" + a.script + "' is not a JSON array of action names");
            return std::nullopt;
        }
        return out;
    }
    std::stringstream in(*text);
    std::string line;
    while (std::getline(in, line)) {
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        auto e = line.find_last_not_of(" \t\r");
        out.push_back(line.substr(b, e - b + 1));
    }
    return out;
}

ordered_json play_json(const Scenario& sc, const Trajectory& t, bool reveal, const ValueVector& cumulative,
                       const std::string& output) {
    ordered_json j;
    j["scenario"] = {{"name", sc.name}, {"hash", t.scenario_hash}};
    j["seed"] = t.seed;
    j["gamma"] = t.gamma;
    j["horizon"] = t.horizon;
    j["outcome"] = to_string(t.outcome(sc));
    j["step_count"] = t.steps.size();
    ordered_json steps = ordered_json::array();
    for (const auto& s : t.steps) {
        ordered_json st;
        st["index"] = s.index;
        st["action"] = sc.actions[static_cast<std::size_t>(s.action)].name;
        st["next_state"] = state_json(sc.variables, s.next_state);
        if (reveal) st["alignment"] = vector_json(s.alignment);
        steps.push_back(std::move(st));
    }
    j["steps"] = std::move(steps);
    j["cumulative"] = vector_json(cumulative);
    j["output"] = output.empty() ? ordered_json(nullptr) : ordered_json(output);
    return j;
}

int cmd_play(Ctx& c, const PlayArgs& a) {
    auto loaded = load_scenario(c, a.scenario);
    if (!loaded.scenario) return loaded.status;
    const Scenario& sc = *loaded.scenario;
    Trajectory traj;
    bool scripted = !a.script.empty() || !a.actions.empty();
    if (scripted) {
        auto script = read_script(c, a);
        if (!script) return kExitDomain;
        try {
            traj = play_scripted(sc, *script, a.seed, a.horizon, a.gamma);
        } catch (const ScriptError& e) {
            emit_error(c, "script", e.what(), {{"step", e.step()}});
            return kExitDomain;
        }
        if (!c.json) {
            for (const auto& s : traj.steps) {
                c.out << "step " << s.index << ": " << sc.actions[static_cast<std::size_t>(s.action)].name << " -> "
                      << state_text(sc, s.next_state);
                if (a.reveal) c.out << "  alignment " << format_vector(s.alignment);
                c.out << "\n";
            }
        }
    } else {
        std::ostream& ui = c.json ? c.err : c.out;
        Episode ep(sc, a.seed, a.horizon, a.gamma);
        ui << "scenario " << sc.name << ", seed " << a.seed << ", horizon " << a.horizon
           << (a.reveal ? ", scores shown" : ", scores hidden until the debrief") << "\n";
        while (!ep.finished()) {
            ui << "\nstep " << ep.trajectory().steps.size() << "\n";
            for (std::size_t i = 0; i < sc.variables.size(); ++i)
                ui << "  " << sc.variables[i].name << ": "
                   << sc.variables[i].levels[static_cast<std::size_t>(ep.state()[i])] << "\n";
            auto names = available_action_names(sc, ep.state());
            for (std::size_t i = 0; i < names.size(); ++i) ui << "  [" << i + 1 << "] " << names[i] << "\n";
            ui << "action (number or name, q to stop)> " << std::flush;
            std::string line;
            if (!std::getline(c.in, line)) break;
            auto b = line.find_first_not_of(" \t\r");
            if (b == std::string::npos) continue;
            line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
            if (line == "q" || line == "quit") break;
            std::string chosen;
            int number = 0;
            auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), number);
            if (ec == std::errc() && p == line.data() + line.size()) {
                if (number >= 1 && static_cast<std::size_t>(number) <= names.size())
                    chosen = names[static_cast<std::size_t>(number - 1)];
            } else if (std::find(names.begin(), names.end(), line) != names.end()) {
                chosen = line;
            }
            if (chosen.empty()) {
                ui << "not an available action: " << line << "\n";
                continue;
            }
            const StepRecord& rec = ep.apply(chosen);
            ui << chosen << " -> " << state_text(sc, rec.next_state) << "\n";
            if (a.reveal) ui << "  alignment " << format_vector(rec.alignment) << "\n";
        }
        traj = ep.trajectory();
    }
    if (!a.output.empty() && !write_output(c, a.output, serialize_trajectory(sc, traj))) return kExitDomain;
    ValueVector cumulative = score_trajectory(sc, traj, a.gamma).cumulative;
    if (c.json) {
        c.out << play_json(sc, traj, a.reveal, cumulative, a.output).dump(2) << "\n";
    } else {
        c.out << "outcome: " << to_string(traj.outcome(sc)) << " after " << traj.steps.size() << " steps\n";
        c.out << "cumulative (" << value_names(sc) << "): " << format_vector(cumulative) << "\n";
        if (!a.output.empty()) c.out << "wrote " << a.output << "\n";
    }
    return kExitOk;
}

// ---- assess ----

struct AssessArgs {
    std::string scenario;
    std::string trajectory;
    std::string front;
    std::string weights;
    std::string output;
};

int cmd_assess(Ctx& c, const AssessArgs& a) {
    auto loaded = load_scenario(c, a.scenario);
    if (!loaded.scenario) return loaded.status;
    const Scenario& sc = *loaded.scenario;
    std::optional<ValueVector> weights;
    if (!a.weights.empty()) {
        weights = parse_weights(a.weights);
        if (!weights || weights->size() != sc.values.size()) {
            emit_error(c, "usage", "--weights needs " + std::to_string(sc.values.size()) + " comma-separated numbers");
            return kExitUsage;
        }
    }
    auto traj_text = load_text(c, a.trajectory, "trajectory");
    if (!traj_text) return kExitUsage;
    auto traj = parse_trajectory(sc, *traj_text);
    emit_diagnostics(c, traj.diagnostics, a.trajectory);
    if (!traj.value) return kExitDomain;

    std::optional<SolutionFront> sol;
    if (!a.front.empty()) {
        auto front_text = load_text(c, a.front, "front");
        if (!front_text) return kExitUsage;
        auto parsed = parse_front(*front_text);
        emit_diagnostics(c, parsed.diagnostics, a.front);
        if (!parsed.value) return kExitDomain;
        if (parsed.value->scenario_hash != scenario_hash(sc)) {
            emit_error(c, "integrity", "front '" + a.front + "' was solved for a different scenario");
            return kExitDomain;
        }
        sol = std::move(parsed.value);
    } else {
        SolveConfig config;
        config.gamma = traj.value->gamma;
        config.horizon = traj.value->horizon;
        sol = pmovi(sc, config);
    }

    AssessmentReport report;
    try {
        report = build_report(sc, *traj.value, *sol, weights);
    } catch (const IntegrityError& e) {
        ordered_json extra = ordered_json::object();
        if (e.step() >= 0) extra["step"] = e.step();
        emit_error(c, "integrity", e.what(), extra);
        return kExitDomain;
    } catch (const ModelError& e) {
        emit_error(c, "assessment", e.what());
        return kExitDomain;
    }
    ordered_json body = report_json(sc, report);
    if (!a.output.empty() && !write_output(c, a.output, body.dump(2) + "\n")) return kExitDomain;
    if (c.json) {
        c.out << body.dump(2) << "\n";
    } else {
        c.out << report_text(sc, report);
        if (!a.output.empty()) c.out << "wrote " << a.output << "\n";
    }
    return kExitOk;
}

// ---- protocol ----

struct ProtocolArgs {
    std::string scenario;
    std::vector<std::string> protocols;
    double gamma = 1.0;
    int horizon = 50;
    std::string output;
};

std::optional<Protocol> load_protocol(Ctx& c, const Scenario& sc, const std::string& path, int& status) {
    auto text = load_text(c, path, "protocol");
    if (!text) {
        status = kExitUsage;
        return std::nullopt;
    }
    auto parsed = parse_protocol(sc, *text);
    emit_diagnostics(c, parsed.diagnostics, path);
    if (!parsed.value) {
        status = kExitDomain;
        return std::nullopt;
    }
    auto diags = validate_protocol(sc, *parsed.value);
    emit_diagnostics(c, diags, path);
    if (has_errors(diags)) {
        status = kExitDomain;
        return std::nullopt;
    }
    return parsed.value;
}

int cmd_protocol(Ctx& c, const std::string& mode, const ProtocolArgs& a) {
    std::size_t need = mode == "eval" ? 1 : 2;
    if (a.protocols.size() != need) {
        emit_error(c, "usage", "protocol " + mode + " takes " + std::to_string(need) + " protocol file(s)");
        return kExitUsage;
    }
    auto loaded = load_scenario(c, a.scenario);
    if (!loaded.scenario) return loaded.status;
    const Scenario& sc = *loaded.scenario;
    SolveConfig config;
    config.gamma = a.gamma;
    config.horizon = a.horizon;
    if (auto why = config.check(); !why.empty()) {
        emit_error(c, "usage", why);
        return kExitUsage;
    }
    std::vector<Protocol> ps;
    for (const auto& path : a.protocols) {
        int status = kExitOk;
        auto p = load_protocol(c, sc, path, status);
        if (!p) return status;
        ps.push_back(std::move(*p));
    }
    ordered_json body;
    std::string text;
    if (mode == "eval") {
        auto e = evaluate_protocol(sc, ps[0], config);
        body = evaluation_json(sc, e);
        text = evaluation_text(sc, e);
    } else {
        auto cmp = compare_protocols(sc, ps[0], ps[1], config);
        body = comparison_json(sc, cmp);
        text = comparison_text(sc, cmp);
    }
    if (!a.output.empty() && !write_output(c, a.output, body.dump(2) + "\n")) return kExitDomain;
    if (c.json)
        c.out << body.dump(2) << "\n";
    else
        c.out << text;
    return kExitOk;
}

// ---- serve ----

struct ServeArgs {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data_dir = "./sessions";
    std::vector<std::string> scenarios;
    bool fsync = false;
    int max_vectors = 32;
};

int cmd_serve(Ctx& c, const ServeArgs& a) {
    std::vector<Scenario> scenarios{builtin_firefight()};
    fs::path stochastic = fs::path(VALENCE_ASSET_DIR) / "firefight-stochastic.scenario.json";
    std::vector<std::string> files = a.scenarios;
    if (fs::is_regular_file(stochastic)) files.insert(files.begin(), stochastic.string());
    for (const auto& f : files) {
        auto loaded = load_scenario(c, f);
        if (!loaded.scenario) return loaded.status;
        bool clash = std::any_of(scenarios.begin(), scenarios.end(),
                                 [&](const Scenario& s) { return s.name == loaded.scenario->name; });
        if (clash) {
            emit_error(c, "usage", "duplicate scenario name '" + loaded.scenario->name + "'");
            return kExitUsage;
        }
        scenarios.push_back(std::move(*loaded.scenario));
    }
    ServiceOptions options;
    options.data_dir = a.data_dir;
    options.fsync = a.fsync;
    options.max_vectors = static_cast<std::size_t>(a.max_vectors);
    std::unique_ptr<SessionManager> manager;
    std::size_t restored = 0;
    try {
        manager = std::make_unique<SessionManager>(std::move(scenarios), options);
        restored = manager->recover();
    } catch (const std::exception& e) {
        emit_error(c, "io", std::string("cannot use data directory: ") + e.what());
        return kExitDomain;
    }
    HttpService http(*manager);

    // Handle SIGINT/SIGTERM on a watcher thread so the server can stop cleanly.
    sigset_t set, old;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, &old);
    std::atomic<bool> done{false};
    std::thread watcher([&] {
        timespec tick{0, 200'000'000};
        while (!done.load()) {
            if (sigtimedwait(&set, nullptr, &tick) > 0) {
                http.stop();
                break;
            }
        }
    });

    int port = a.port;
    bool ok = true;
    if (port == 0) {
        port = http.bind_any(a.host);
        ok = port > 0;
    }
    if (ok) {
        if (c.json)
            c.out << ordered_json{{"event", "serving"}, {"host", a.host}, {"port", port}, {"data_dir", a.data_dir},
                                  {"restored_sessions", restored}}
                         .dump()
                  << std::endl;
        else
            c.out << "serving on http://" << a.host << ":" << port << "/api/v1 (data dir " << a.data_dir << ", "
                  << restored << " sessions restored)" << std::endl;
        ok = a.port == 0 ? http.listen_after_bind() : http.listen(a.host, port);
    }
    done = true;
    watcher.join();
    pthread_sigmask(SIG_SETMASK, &old, nullptr);
    if (!ok) {
        emit_error(c, "bind", "cannot listen on " + a.host + ":" + std::to_string(a.port));
        return kExitDomain;
    }
    if (!c.json) c.out << "stopped\n";
    return kExitOk;
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    Ctx c{in, out, err};
    for (std::size_t i = 0; i < args.size(); ++i)
        if (args[i] == "--format=json" || (args[i] == "--format" && i + 1 < args.size() && args[i + 1] == "json"))
            c.json = true;

    CLI::App app{"Value-aligned decision training engine", "valence"};
    app.require_subcommand(1, 1);
    std::string format = "text";
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
    };

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Parse and check a scenario document");
    validate->add_option("scenario", validate_path, "Scenario file")->required();
    add_format(validate);

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "Compute the Pareto front with multi-objective value iteration");
    solve->add_option("scenario", solve_args.scenario, "Scenario file or shipped name")->required();
    solve->add_option("--gamma", solve_args.gamma, "Discount factor in (0, 1]")->check(CLI::Range(0.0, 1.0));
    solve->add_option("--horizon", solve_args.horizon, "Episode horizon (>= 1)")->check(CLI::Range(1, 100000));
    solve->add_option("--epsilon", solve_args.epsilon, "Convergence threshold")->check(CLI::PositiveNumber);
    solve->add_option("--max-vectors", solve_args.max_vectors, "Cap on vectors per state (0 = none)")
        ->check(CLI::NonNegativeNumber);
    solve->add_option("--max-sweeps", solve_args.max_sweeps, "Sweep budget")->check(CLI::PositiveNumber);
    solve->add_option("-o,--output", solve_args.output, "Write the solution to this *.front.json");
    add_format(solve);

    PlayArgs play_args;
    auto* play = app.add_subcommand("play", "Play an episode interactively or from a script");
    play->add_option("scenario", play_args.scenario, "Scenario file or shipped name")->required();
    play->add_option("--seed", play_args.seed, "Random seed");
    play->add_option("--horizon", play_args.horizon, "Episode horizon (>= 1)")->check(CLI::Range(1, 100000));
    play->add_option("--gamma", play_args.gamma, "Discount factor in (0, 1]")->check(CLI::Range(0.0, 1.0));
    auto* script_opt = play->add_option("--script", play_args.script, "Action list: JSON array or one name per line");
    play->add_option("--actions", play_args.actions, "Comma-separated action list")->excludes(script_opt);
    play->add_flag("--reveal", play_args.reveal, "Show per-step alignment scores");
    play->add_option("-o,--output", play_args.output, "Write the trajectory to this *.traj.jsonl");
    add_format(play);

    AssessArgs assess_args;
    auto* assess = app.add_subcommand("assess", "Score a trajectory against the Pareto front");
    assess->add_option("scenario", assess_args.scenario, "Scenario file or shipped name")->required();
    assess->add_option("trajectory", assess_args.trajectory, "*.traj.jsonl file")->required();
    assess->add_option("front", assess_args.front, "*.front.json file (solved on demand if omitted)");
    assess->add_option("--weights", assess_args.weights, "Comma-separated value weights");
    assess->add_option("-o,--output", assess_args.output, "Write the report to this *.report.json");
    add_format(assess);

    ProtocolArgs protocol_args;
    std::string protocol_mode;
    auto* protocol = app.add_subcommand("protocol", "Evaluate or compare deontic protocols");
    protocol->add_option("mode", protocol_mode, "eval or compare")->required()->check(CLI::IsMember({"eval", "compare"}));
    protocol->add_option("scenario", protocol_args.scenario, "Scenario file or shipped name")->required();
    protocol->add_option("protocols", protocol_args.protocols, "Protocol file(s)")->required();
    protocol->add_option("--gamma", protocol_args.gamma, "Discount factor in (0, 1]")->check(CLI::Range(0.0, 1.0));
    protocol->add_option("--horizon", protocol_args.horizon, "Episode horizon (>= 1)")->check(CLI::Range(1, 100000));
    protocol->add_option("-o,--output", protocol_args.output, "Write the JSON report here");
    add_format(protocol);

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "Run the session HTTP service");
    std::string port_text = env_or("VALENCE_PORT", "8080");
    serve_args.data_dir = env_or("VALENCE_DATA_DIR", "./sessions");
    serve->add_option("--host", serve_args.host, "Bind address");
    serve->add_option("--port", port_text, "TCP port (0 picks a free one)");
    serve->add_option("--data-dir", serve_args.data_dir, "Session log directory");
    serve->add_option("--scenario", serve_args.scenarios, "Extra scenario files to serve");
    serve->add_flag("--fsync", serve_args.fsync, "fsync every event");
    serve->add_option("--max-vectors", serve_args.max_vectors, "Cap on front vectors per state (0 = exact)")
        ->check(CLI::NonNegativeNumber);
    add_format(serve);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (c.json) {
            emit_error(c, "usage", e.what());
        } else {
            err << "error: " << e.what() << "\n";
            if (auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front())
                err << "run with " << (sub == &app ? std::string() : sub->get_name() + " ") << "--help for usage\n";
        }
        return kExitUsage;
    }
    c.json = format == "json";

    try {
        if (*validate) return cmd_validate(c, validate_path);
        if (*solve) {
            if (solve_args.gamma <= 0.0) {
                emit_error(c, "usage", "--gamma must lie in (0, 1]");
                return kExitUsage;
            }
            return cmd_solve(c, solve_args);
        }
        if (*play) {
            if (play_args.gamma <= 0.0) {
                emit_error(c, "usage", "--gamma must lie in (0, 1]");
                return kExitUsage;
            }
            return cmd_play(c, play_args);
        }
        if (*assess) return cmd_assess(c, assess_args);
        if (*protocol) {
            if (protocol_args.gamma <= 0.0) {
                emit_error(c, "usage", "--gamma must lie in (0, 1]");
                return kExitUsage;
            }
            return cmd_protocol(c, protocol_mode, protocol_args);
        }
        if (*serve) {
            int port = -1;
            auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
            if (ec != std::errc() || p != port_text.data() + port_text.size() || port < 0 || port > 65535) {
                emit_error(c, "usage", "--port must be an integer in [0, 65535]");
                return kExitUsage;
            }
            serve_args.port = port;
            return cmd_serve(c, serve_args);
        }
    } catch (const ModelError& e) {
        emit_error(c, "model", e.what());
        return kExitDomain;
    } catch (const ContractViolation& e) {
        emit_error(c, "contract", e.what());
        return kExitDomain;
    }
    return kExitUsage;
}

}  // namespace valence
