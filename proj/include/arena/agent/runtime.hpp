#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "arena/agent/decision_record.hpp"
#include "arena/agent/policy.hpp"
#include "arena/data/datastore.hpp"
#include "arena/market/market_spec.hpp"
#include "arena/toolserver/server.hpp"

namespace arena::agent {

/// In-process client for one session. Requests go through the same
/// line-level protocol path as remote clients.
class SessionDriver {
public:
    SessionDriver(toolserver::ToolServer& server, std::string token);

    /// Sends a request and returns the parsed response object.
    nlohmann::json call(const std::string& method, const nlohmann::json& params,
                        const std::string& reasoning = {});
    /// The request object most recently sent.
    const nlohmann::json& last_request() const noexcept { return last_request_; }

    bool finished();
    const std::string& token() const noexcept { return token_; }
    toolserver::ToolServer& server() noexcept { return server_; }

private:
    toolserver::ToolServer& server_;
    std::string token_;
    std::int64_t next_id_ = 1;
    nlohmann::json last_request_;
};

/// Observation for the session's current clock, built from the observe payload.
Observation build_observation(const toolserver::Session& session);

/// Runs the observe-reason-act loop for the session's current decision point
/// until the policy stops, the tool budget runs out, or the policy faults.
/// Rejections reach the policy verbatim through the transcript.
DecisionRecord run_decision_point(SessionDriver& driver, Policy& policy);

/// Drives a whole window and returns the records and equity curve.
SessionResult run_session(const market::MarketSpec& spec, const data::DataStore& store,
                          const toolserver::SessionConfig& config, Policy& policy);

/// Log directory: decisions.jsonl, equity.csv, config.json.
void write_session_logs(const std::filesystem::path& dir, const SessionResult& result, const nlohmann::json& config);

struct SessionLogs {
    SessionResult result;
    nlohmann::json config;
};

/// Throws Error(corrupt_log) on any structural problem.
SessionLogs read_session_logs(const std::filesystem::path& dir);

/// SHA-256 over decisions.jsonl with the wall-clock field removed.
std::string decision_log_digest(const std::filesystem::path& decisions_jsonl);

}  // namespace arena::agent
