#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "valence/model.hpp"
#include "valence/solver.hpp"

namespace valence {

struct ServiceOptions {
    std::string data_dir = "./sessions";
    bool fsync = false;  // fsync each event in addition to flushing it
    int default_horizon = 50;
    double default_gamma = 1.0;
    /// Per-state vector cap for solved fronts (0 = exact). Stochastic
    /// scenarios need it: their exact fronts grow exponentially with H.
    std::size_t max_vectors = 32;
    /// RFC 3339 UTC timestamps; replaceable for tests.
    std::function<std::string()> clock;
};

/// HTTP-shaped result of a service call.
struct ServiceResponse {
    int status = 200;
    nlohmann::ordered_json body;
};

/// Every endpoint of the training API, independent of the transport.
/// Sessions are persisted as one append-only `<id>.events.jsonl` per
/// session; each event is flushed before the call returns.
class SessionManager {
public:
    SessionManager(std::vector<Scenario> scenarios, ServiceOptions options);
    ~SessionManager();
    SessionManager(const SessionManager&) = delete;
    SessionManager& operator=(const SessionManager&) = delete;

    /// Rebuilds sessions from the event logs in the data directory. A torn
    /// final line is dropped (and cut from the file). Returns the number of
    /// sessions restored.
    std::size_t recover();

    ServiceResponse list_scenarios() const;
    ServiceResponse scenario_front(const std::string& name, const std::optional<std::string>& gamma,
                                   const std::optional<std::string>& horizon);
    ServiceResponse create_session(const nlohmann::json& request);
    ServiceResponse get_view(const std::string& id) const;
    /// Request: {action, idempotency_key?, expected_step?}. With
    /// expected_step the call fails with 409 unless exactly that many steps
    /// have been applied.
    ServiceResponse apply_action(const std::string& id, const nlohmann::json& request);
    ServiceResponse get_report(const std::string& id, const std::optional<std::string>& weights);

    /// Canonical dump of a session's full state (view with alignments,
    /// trajectory, idempotency keys, event count); used to check replay.
    std::optional<std::string> snapshot(const std::string& id) const;
    std::vector<std::string> session_ids() const;

    /// Solved front for (scenario, gamma, horizon), memoised in memory and
    /// under `<data_dir>/fronts/`.
    std::shared_ptr<const SolutionFront> front_for(const Scenario& scenario, double gamma, int horizon);

    [[nodiscard]] const ServiceOptions& options() const { return options_; }

private:
    struct Session;

    std::vector<Scenario> scenarios_;
    ServiceOptions options_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::mutex fronts_mutex_;
    std::map<std::string, std::shared_ptr<const SolutionFront>> fronts_;

    const Scenario* find_scenario(const std::string& name) const;
    std::shared_ptr<Session> find_session(const std::string& id) const;
    std::string now() const;
    nlohmann::ordered_json view(const Session& s, bool force_reveal) const;
    void append_event(Session& s, const std::string& kind, nlohmann::ordered_json payload, const std::string& at);
};

/// Uniform error body {code, message, details}.
ServiceResponse service_error(int status, const std::string& code, const std::string& message,
                              nlohmann::ordered_json details = nlohmann::ordered_json::object());

/// 16 random bytes, base64url without padding (22 characters).
std::string new_session_id();

/// Current UTC time, RFC 3339 with milliseconds.
std::string rfc3339_now();

/// Binds the REST routes under /api/v1 to a SessionManager.
class HttpService {
public:
    explicit HttpService(SessionManager& manager);
    ~HttpService();

    /// Blocks until stop(); false when the address cannot be bound.
    bool listen(const std::string& host, int port);
    /// Binds to an ephemeral port; returns it, or -1.
    int bind_any(const std::string& host);
    bool listen_after_bind();
    /// Blocks until a listen call is accepting connections.
    void wait_until_ready();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace valence
