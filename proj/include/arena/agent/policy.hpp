#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "arena/agent/decision_record.hpp"
#include "arena/core/time.hpp"
#include "arena/portfolio/portfolio.hpp"

namespace arena::agent {

/// What the agent perceives at a decision point: prices, its own positions,
/// and whatever tool results it has gathered so far.
struct Observation {
    Timestamp clock;
    int decision_index = 0;
    portfolio::PortfolioState positions;
    portfolio::Prices prev_close;  // latest close strictly before the decision bar
    portfolio::Prices buy_price;   // decision bar open, the execution price
    std::vector<std::string> gaps;
    int budget = 0;
    std::vector<nlohmann::json> gathered;  // successful tool results this decision
};

/// Decodes the `observe` result payload.
Observation observation_from_json(const nlohmann::json& observe_result);

struct ToolCall {
    std::string method;
    nlohmann::json params = nlohmann::json::object();
};

/// Either a tool call or, when `call` is empty, the stop signal. `reasoning`
/// is free text recorded in the decision log.
struct PolicyStep {
    std::optional<ToolCall> call;
    std::string reasoning;

    static PolicyStep stop(std::string reasoning = {}) { return {std::nullopt, std::move(reasoning)}; }
    static PolicyStep tool(std::string method, nlohmann::json params, std::string reasoning = {}) {
        return {ToolCall{std::move(method), std::move(params)}, std::move(reasoning)};
    }
};

/// Decision procedure. Called repeatedly within one decision point with the
/// transcript of the calls it has made so far (rejections included).
class Policy {
public:
    virtual ~Policy() = default;
    virtual PolicyStep next(const Observation& observation, std::span<const TraceEntry> transcript) = 0;
};

}  // namespace arena::agent
