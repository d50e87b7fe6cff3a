#include "valence/service.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <random>
#include <sstream>

#include <unistd.h>

#include <httplib.h>

#include "valence/assessment.hpp"
#include "valence/front_io.hpp"
#include "valence/scenario_io.hpp"
#include "valence/trajectory.hpp"

namespace valence {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

struct SessionManager::Session {
    std::mutex mutex;
    std::string id;
    const Scenario* scenario = nullptr;
    std::string hash;
    std::uint64_t seed = 0;
    double gamma = 1.0;
    int horizon = 50;
    bool reveal = false;
    std::unique_ptr<Episode> episode;
    std::string created_at;
    std::string updated_at;
    std::map<std::string, std::string> idempotent;  // key -> response body
    std::map<std::string, std::string> reports;     // weights -> report body
    std::uint64_t next_seq = 0;
    bool finished_logged = false;
    std::FILE* log = nullptr;

    ~Session() {
        if (log) std::fclose(log);
    }
};

ServiceResponse service_error(int status, const std::string& code, const std::string& message,
                              ordered_json details) {
    ServiceResponse r;
    r.status = status;
    r.body["code"] = code;
    r.body["message"] = message;
    r.body["details"] = std::move(details);
    return r;
}

std::string new_session_id() {
    static constexpr char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
    std::random_device rd;
    unsigned char bytes[18] = {};
    for (int i = 0; i < 16; i += 4) {
        std::uint32_t x = rd();
        for (int j = 0; j < 4; ++j) bytes[i + j] = static_cast<unsigned char>(x >> (8 * j));
    }
    // 16 bytes = 128 bits -> 22 base64 digits (the last one carries 2 bits).
    std::string out;
    for (int i = 0; i < 18 && out.size() < 22; i += 3) {
        std::uint32_t chunk = (std::uint32_t(bytes[i]) << 16) | (std::uint32_t(bytes[i + 1]) << 8) | bytes[i + 2];
        for (int k = 3; k >= 0 && out.size() < 22; --k) out += alphabet[(chunk >> (6 * k)) & 63];
    }
    return out;
}

std::string rfc3339_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[48];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

namespace {

std::string number_key(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<int> parse_int(const std::string& s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

ordered_json names_json(const std::vector<std::string>& names) {
    ordered_json out = ordered_json::array();
    for (const auto& n : names) out.push_back(n);
    return out;
}

}  // namespace

SessionManager::SessionManager(std::vector<Scenario> scenarios, ServiceOptions options)
    : scenarios_(std::move(scenarios)), options_(std::move(options)) {
    fs::create_directories(options_.data_dir);
}

SessionManager::~SessionManager() = default;

std::string SessionManager::now() const { return options_.clock ? options_.clock() : rfc3339_now(); }

const Scenario* SessionManager::find_scenario(const std::string& name) const {
    for (const auto& s : scenarios_)
        if (s.name == name) return &s;
    return nullptr;
}

std::shared_ptr<SessionManager::Session> SessionManager::find_session(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::vector<std::string> SessionManager::session_ids() const {
    std::shared_lock lock(sessions_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) out.push_back(id);
    return out;
}

void SessionManager::append_event(Session& s, const std::string& kind, ordered_json payload, const std::string& at) {
    ordered_json e;
    e["seq"] = s.next_seq;
    e["session"] = s.id;
    e["kind"] = kind;
    e["at"] = at;
    e["payload"] = std::move(payload);
    std::string line = e.dump() + "\n";
    if (!s.log) s.log = std::fopen((fs::path(options_.data_dir) / (s.id + ".events.jsonl")).c_str(), "ab");
    if (!s.log) throw std::runtime_error("cannot open event log for session " + s.id);
    if (std::fwrite(line.data(), 1, line.size(), s.log) != line.size() || std::fflush(s.log) != 0)
        throw std::runtime_error("cannot write event log for session " + s.id);
    if (options_.fsync) ::fsync(::fileno(s.log));
    ++s.next_seq;
}

ordered_json SessionManager::view(const Session& s, bool force_reveal) const {
    const Scenario& sc = *s.scenario;
    const Episode& ep = *s.episode;
    auto outcome = ep.outcome();
    bool reveal = s.reveal || outcome.has_value() || force_reveal;
    ordered_json v;
    v["id"] = s.id;
    v["scenario"] = {{"name", sc.name}, {"hash", s.hash}};
    v["seed"] = s.seed;
    v["config"] = {{"gamma", s.gamma}, {"horizon", s.horizon}, {"reveal", s.reveal}};
    v["status"] = outcome ? "finished" : "active";
    v["outcome"] = outcome ? ordered_json(std::string(to_string(*outcome))) : ordered_json(nullptr);
    v["state"] = state_json(sc.variables, ep.state());
    ordered_json vars = ordered_json::array();
    for (std::size_t i = 0; i < sc.variables.size(); ++i) {
        const auto& var = sc.variables[i];
        int level = ep.state()[i];
        vars.push_back({{"name", var.name},
                        {"level", var.levels[static_cast<std::size_t>(level)]},
                        {"index", level},
                        {"size", var.size()}});
    }
    v["variables"] = std::move(vars);
    v["actions"] = outcome ? ordered_json::array() : names_json(available_action_names(sc, ep.state()));
    ordered_json values = ordered_json::array();
    for (const auto& val : sc.values) values.push_back(val.name);
    v["values"] = std::move(values);
    const auto& steps = ep.trajectory().steps;
    v["step_count"] = steps.size();
    ordered_json log = ordered_json::array();
    for (const auto& st : steps) {
        ordered_json j;
        j["index"] = st.index;
        j["action"] = sc.actions[static_cast<std::size_t>(st.action)].name;
        j["state"] = state_json(sc.variables, st.state);
        j["next_state"] = state_json(sc.variables, st.next_state);
        if (reveal) j["alignment"] = vector_json(st.alignment);
        log.push_back(std::move(j));
    }
    v["steps"] = std::move(log);
    if (reveal) v["cumulative"] = vector_json(score_trajectory(sc, ep.trajectory(), s.gamma).cumulative);
    v["created_at"] = s.created_at;
    v["updated_at"] = s.updated_at;
    return v;
}

ServiceResponse SessionManager::list_scenarios() const {
    ServiceResponse r;
    ordered_json list = ordered_json::array();
    for (const auto& s : scenarios_) {
        ordered_json j;
        j["name"] = s.name;
        j["hash"] = scenario_hash(s);
        j["description"] = s.description;
        ordered_json vars = ordered_json::array();
        for (const auto& v : s.variables) vars.push_back({{"name", v.name}, {"levels", v.levels}});
        j["variables"] = std::move(vars);
        ordered_json actions = ordered_json::array();
        for (const auto& a : s.actions) actions.push_back(a.name);
        j["actions"] = std::move(actions);
        ordered_json values = ordered_json::array();
        for (const auto& v : s.values) values.push_back(v.name);
        j["values"] = std::move(values);
        j["initial_state"] = state_json(s.variables, s.initial);
        list.push_back(std::move(j));
    }
    r.body["scenarios"] = std::move(list);
    return r;
}

std::shared_ptr<const SolutionFront> SessionManager::front_for(const Scenario& scenario, double gamma, int horizon) {
    std::string hash = scenario_hash(scenario);
    std::string cap = std::to_string(options_.max_vectors);
    std::string key = hash + "|" + number_key(gamma) + "|" + std::to_string(horizon) + "|" + cap;
    std::lock_guard lock(fronts_mutex_);
    if (auto it = fronts_.find(key); it != fronts_.end()) return it->second;
    fs::path dir = fs::path(options_.data_dir) / "fronts";
    fs::create_directories(dir);
    std::string hex = hash.substr(hash.find(':') + 1, 16);
    fs::path file = dir / (scenario.name + "-" + hex + "-g" + number_key(gamma) + "-h" + std::to_string(horizon) + "-m" +
                           cap + ".front.json");
    std::shared_ptr<const SolutionFront> sol;
    if (auto text = read_text_file(file.string())) {
        auto parsed = parse_front(*text);
        if (parsed.value && parsed.value->scenario_hash == hash && parsed.value->config.gamma == gamma &&
            parsed.value->config.horizon == horizon && parsed.value->config.max_vectors == options_.max_vectors)
            sol = std::make_shared<const SolutionFront>(std::move(*parsed.value));
    }
    if (!sol) {
        SolveConfig config;
        config.gamma = gamma;
        config.horizon = horizon;
        config.max_vectors = options_.max_vectors;
        sol = std::make_shared<const SolutionFront>(pmovi(scenario, config));
        fs::path tmp = file;
        tmp += ".tmp";
        if (write_text_file(tmp.string(), serialize_front(*sol))) fs::rename(tmp, file);
    }
    fronts_[key] = sol;
    return sol;
}

ServiceResponse SessionManager::scenario_front(const std::string& name, const std::optional<std::string>& gamma_text,
                                               const std::optional<std::string>& horizon_text) {
    const Scenario* sc = find_scenario(name);
    if (!sc) return service_error(404, "unknown_scenario", "no scenario named '" + name + "'");
    SolveConfig config;
    config.gamma = options_.default_gamma;
    config.horizon = options_.default_horizon;
    if (gamma_text) {
        auto g = parse_double(*gamma_text);
        if (!g) return service_error(400, "invalid_request", "gamma must be a number");
        config.gamma = *g;
    }
    if (horizon_text) {
        auto h = parse_int(*horizon_text);
        if (!h) return service_error(400, "invalid_request", "horizon must be an integer");
        config.horizon = *h;
    }
    if (config.horizon < 1 || config.horizon > 10000)
        return service_error(400, "invalid_request", "horizon must lie in [1, 10000]");
    if (auto why = config.check(); !why.empty()) return service_error(400, "invalid_request", why);
    auto sol = front_for(*sc, config.gamma, config.horizon);
    ServiceResponse r;
    r.body = front_summary(*sol, sc->initial);
    return r;
}

ServiceResponse SessionManager::create_session(const json& req) {
    if (!req.is_object()) return service_error(400, "invalid_request", "request body must be a JSON object");
    if (!req.contains("scenario") || !req["scenario"].is_string())
        return service_error(400, "invalid_request", "field 'scenario' (string) is required");
    std::string name = req["scenario"].get<std::string>();
    const Scenario* sc = find_scenario(name);
    if (!sc) return service_error(404, "unknown_scenario", "no scenario named '" + name + "'", {{"scenario", name}});

    auto s = std::make_shared<Session>();
    s->scenario = sc;
    s->hash = scenario_hash(*sc);
    s->gamma = options_.default_gamma;
    s->horizon = options_.default_horizon;
    if (req.contains("seed")) {
        const json& seed = req["seed"];
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
            return service_error(400, "invalid_request", "seed must be a non-negative integer");
        s->seed = req["seed"].get<std::uint64_t>();
    } else {
        std::random_device rd;
        s->seed = (std::uint64_t(rd()) << 32) | rd();
    }
    const json* config = req.contains("config") ? &req["config"] : &req;
    if (config->contains("gamma")) {
        if (!(*config)["gamma"].is_number()) return service_error(400, "invalid_request", "gamma must be a number");
        s->gamma = (*config)["gamma"].get<double>();
        if (!(s->gamma > 0.0 && s->gamma <= 1.0)) return service_error(400, "invalid_request", "gamma must lie in (0, 1]");
    }
    if (config->contains("horizon")) {
        if (!(*config)["horizon"].is_number_integer())
            return service_error(400, "invalid_request", "horizon must be an integer");
        long long h = (*config)["horizon"].get<long long>();
        if (h < 1 || h > 10000) return service_error(400, "invalid_request", "horizon must lie in [1, 10000]");
        s->horizon = static_cast<int>(h);
    }
    if (config->contains("reveal")) {
        if (!(*config)["reveal"].is_boolean()) return service_error(400, "invalid_request", "reveal must be a boolean");
        s->reveal = (*config)["reveal"].get<bool>();
    }
    s->episode = std::make_unique<Episode>(*sc, s->seed, s->horizon, s->gamma);
    s->created_at = s->updated_at = now();
    {
        std::unique_lock lock(sessions_mutex_);
        do s->id = new_session_id();
        while (sessions_.count(s->id));
        sessions_[s->id] = s;
    }
    std::lock_guard lock(s->mutex);
    append_event(*s, "created",
                 {{"scenario", sc->name},
                  {"hash", s->hash},
                  {"seed", s->seed},
                  {"gamma", s->gamma},
                  {"horizon", s->horizon},
                  {"reveal", s->reveal}},
                 s->created_at);
    ServiceResponse r;
    r.status = 201;
    r.body = view(*s, false);
    return r;
}

ServiceResponse SessionManager::get_view(const std::string& id) const {
    auto s = find_session(id);
    if (!s) return service_error(404, "unknown_session", "no session '" + id + "'");
    std::lock_guard lock(s->mutex);
    ServiceResponse r;
    r.body = view(*s, false);
    return r;
}

ServiceResponse SessionManager::apply_action(const std::string& id, const json& req) {
    auto s = find_session(id);
    if (!s) return service_error(404, "unknown_session", "no session '" + id + "'");
    if (!req.is_object() || !req.contains("action") || !req["action"].is_string())
        return service_error(400, "invalid_request", "field 'action' (string) is required");
    std::string action = req["action"].get<std::string>();
    std::optional<std::string> key;
    if (req.contains("idempotency_key")) {
        if (!req["idempotency_key"].is_string() || req["idempotency_key"].get<std::string>().empty())
            return service_error(400, "invalid_request", "idempotency_key must be a non-empty string");
        key = req["idempotency_key"].get<std::string>();
    }
    std::optional<long long> expected;
    if (req.contains("expected_step")) {
        if (!req["expected_step"].is_number_integer())
            return service_error(400, "invalid_request", "expected_step must be an integer");
        expected = req["expected_step"].get<long long>();
    }

    std::lock_guard lock(s->mutex);
    if (key) {
        if (auto it = s->idempotent.find(*key); it != s->idempotent.end()) {
            ServiceResponse r;
            r.body = ordered_json::parse(it->second);
            return r;
        }
    }
    Episode& ep = *s->episode;
    if (auto outcome = ep.outcome())
        return service_error(409, "session_finished", "the session has finished",
                             {{"outcome", std::string(to_string(*outcome))}});
    auto steps = static_cast<long long>(ep.trajectory().steps.size());
    if (expected && *expected != steps)
        return service_error(409, "step_conflict", "another action was applied first",
                             {{"expected_step", *expected}, {"step_count", steps}});
    auto available = available_action_names(*s->scenario, ep.state());
    if (std::find(available.begin(), available.end(), action) == available.end())
        return service_error(422, "unavailable_action", "action '" + action + "' is not available",
                             {{"available", names_json(available)}});

    const StepRecord& rec = ep.apply(action);
    std::string at = now();
    s->updated_at = at;
    bool finished = ep.finished();
    ServiceResponse r;
    ordered_json step;
    step["index"] = rec.index;
    step["action"] = action;
    step["state"] = state_json(s->scenario->variables, rec.state);
    step["next_state"] = state_json(s->scenario->variables, rec.next_state);
    if (s->reveal || finished) step["alignment"] = vector_json(rec.alignment);
    r.body["step"] = std::move(step);
    r.body["session"] = view(*s, false);

    ordered_json payload;
    payload["action"] = action;
    payload["step"] = rec.index;
    if (key) payload["idempotency_key"] = *key;
    payload["response"] = r.body;
    append_event(*s, "action", std::move(payload), at);
    if (key) s->idempotent[*key] = r.body.dump();
    if (finished) {
        append_event(*s, "finished", {{"outcome", std::string(to_string(*ep.outcome()))}}, at);
        s->finished_logged = true;
    }
    return r;
}

ServiceResponse SessionManager::get_report(const std::string& id, const std::optional<std::string>& weights_text) {
    auto s = find_session(id);
    if (!s) return service_error(404, "unknown_session", "no session '" + id + "'");
    std::lock_guard lock(s->mutex);
    if (!s->episode->finished()) return service_error(409, "session_active", "the session is still active");
    const Scenario& sc = *s->scenario;
    std::optional<ValueVector> weights;
    std::string cache_key;
    if (weights_text && !weights_text->empty()) {
        ValueVector w;
        std::stringstream in(*weights_text);
        std::string part;
        while (std::getline(in, part, ',')) {
            auto x = parse_double(part);
            if (!x || !std::isfinite(*x)) return service_error(400, "invalid_weights", "weights must be numbers");
            w.push_back(*x);
        }
        if (w.size() != sc.values.size())
            return service_error(400, "invalid_weights",
                                 "expected " + std::to_string(sc.values.size()) + " comma-separated weights");
        for (double x : w) cache_key += number_key(x) + ",";
        weights = std::move(w);
    }
    ServiceResponse r;
    if (auto it = s->reports.find(cache_key); it != s->reports.end()) {
        r.body = ordered_json::parse(it->second);
        return r;
    }
    auto sol = front_for(sc, s->gamma, s->horizon);
    AssessmentReport rep = build_report(sc, s->episode->trajectory(), *sol, weights);
    r.body["session"] = s->id;
    ordered_json body = report_json(sc, rep);
    for (auto& [k, v] : body.items()) r.body[k] = std::move(v);
    s->reports[cache_key] = r.body.dump();
    return r;
}

std::optional<std::string> SessionManager::snapshot(const std::string& id) const {
    auto s = find_session(id);
    if (!s) return std::nullopt;
    std::lock_guard lock(s->mutex);
    ordered_json j;
    j["view"] = view(*s, true);
    j["trajectory"] = serialize_trajectory(*s->scenario, s->episode->trajectory());
    j["idempotent"] = s->idempotent;
    j["events"] = s->next_seq;
    j["finished_logged"] = s->finished_logged;
    return j.dump();
}

std::size_t SessionManager::recover() {
    std::vector<fs::path> logs;
    for (const auto& entry : fs::directory_iterator(options_.data_dir)) {
        std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > 13 && name.ends_with(".events.jsonl")) logs.push_back(entry.path());
    }
    std::sort(logs.begin(), logs.end());
    std::size_t restored = 0;
    for (const auto& path : logs) {
        auto text = read_text_file(path.string());
        if (!text) continue;
        std::shared_ptr<Session> s;
        std::size_t good = 0;  // bytes of the log that replayed cleanly
        std::size_t pos = 0;
        while (pos < text->size()) {
            std::size_t nl = text->find('\n', pos);
            if (nl == std::string::npos) break;  // torn final line
            ordered_json e;
            try {
                e = ordered_json::parse(text->begin() + static_cast<std::ptrdiff_t>(pos),
                                        text->begin() + static_cast<std::ptrdiff_t>(nl));
            } catch (const json::exception&) {
                break;
            }
            try {
                std::uint64_t seq = e.at("seq").get<std::uint64_t>();
                std::string kind = e.at("kind").get<std::string>();
                std::string at = e.at("at").get<std::string>();
                const auto& p = e.at("payload");
                if (!s) {
                    if (kind != "created" || seq != 0) break;
                    const Scenario* sc = find_scenario(p.at("scenario").get<std::string>());
                    if (!sc || scenario_hash(*sc) != p.at("hash").get<std::string>()) break;
                    s = std::make_shared<Session>();
                    s->id = e.at("session").get<std::string>();
                    s->scenario = sc;
                    s->hash = p.at("hash").get<std::string>();
                    s->seed = p.at("seed").get<std::uint64_t>();
                    s->gamma = p.at("gamma").get<double>();
                    s->horizon = p.at("horizon").get<int>();
                    s->reveal = p.at("reveal").get<bool>();
                    s->episode = std::make_unique<Episode>(*sc, s->seed, s->horizon, s->gamma);
                    s->created_at = s->updated_at = at;
                } else {
                    if (seq != s->next_seq) break;
                    if (kind == "action") {
                        if (s->episode->finished()) break;
                        if (p.at("step").get<std::size_t>() != s->episode->trajectory().steps.size()) break;
                        s->episode->apply(p.at("action").get<std::string>());
                        if (p.contains("idempotency_key"))
                            s->idempotent[p["idempotency_key"].get<std::string>()] = p.at("response").dump();
                    } else if (kind == "finished") {
                        if (!s->episode->finished() || s->finished_logged) break;
                        s->finished_logged = true;
                    } else {
                        break;
                    }
                    s->updated_at = at;
                }
                s->next_seq = seq + 1;
            } catch (const std::exception&) {
                break;
            }
            pos = nl + 1;
            good = pos;
        }
        if (good != text->size()) fs::resize_file(path, good);
        if (!s) {
            if (good == 0) fs::remove(path);
            continue;
        }
        if (s->episode->finished() && !s->finished_logged) {
            append_event(*s, "finished", {{"outcome", std::string(to_string(*s->episode->outcome()))}},
                         s->updated_at);
            s->finished_logged = true;
        }
        std::unique_lock lock(sessions_mutex_);
        sessions_[s->id] = s;
        ++restored;
    }
    return restored;
}

struct HttpService::Impl {
    SessionManager& manager;
    httplib::Server server;
    explicit Impl(SessionManager& m) : manager(m) {}
};

namespace {

void send(httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body.dump(), "application/json");
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
}

std::optional<json> body_json(const httplib::Request& req, httplib::Response& res) {
    try {
        return json::parse(req.body.empty() ? std::string("{}") : req.body);
    } catch (const json::exception&) {
        send(res, service_error(400, "invalid_json", "request body is not valid JSON"));
        return std::nullopt;
    }
}

}  // namespace

HttpService::HttpService(SessionManager& manager) : impl_(std::make_unique<Impl>(manager)) {
    auto& srv = impl_->server;
    SessionManager& m = manager;
    srv.Get("/api/v1/scenarios", [&m](const httplib::Request&, httplib::Response& res) { send(res, m.list_scenarios()); });
    srv.Get(R"(/api/v1/scenarios/([^/]+)/front)", [&m](const httplib::Request& req, httplib::Response& res) {
        send(res, m.scenario_front(req.matches[1], param(req, "gamma"), param(req, "horizon")));
    });
    srv.Post("/api/v1/sessions", [&m](const httplib::Request& req, httplib::Response& res) {
        if (auto body = body_json(req, res)) send(res, m.create_session(*body));
    });
    srv.Get(R"(/api/v1/sessions/([A-Za-z0-9_-]+))", [&m](const httplib::Request& req, httplib::Response& res) {
        send(res, m.get_view(req.matches[1]));
    });
    srv.Post(R"(/api/v1/sessions/([A-Za-z0-9_-]+)/actions)", [&m](const httplib::Request& req, httplib::Response& res) {
        if (auto body = body_json(req, res)) send(res, m.apply_action(req.matches[1], *body));
    });
    srv.Get(R"(/api/v1/sessions/([A-Za-z0-9_-]+)/report)", [&m](const httplib::Request& req, httplib::Response& res) {
        send(res, m.get_report(req.matches[1], param(req, "weights")));
    });
    srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
    srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) send(res, service_error(res.status, "not_found", "no such endpoint"));
    });
    srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        send(res, service_error(500, "internal", what));
    });
}

HttpService::~HttpService() = default;

bool HttpService::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpService::bind_any(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpService::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpService::wait_until_ready() { impl_->server.wait_until_ready(); }

void HttpService::stop() { impl_->server.stop(); }

}  // namespace valence
