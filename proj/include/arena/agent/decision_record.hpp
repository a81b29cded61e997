#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "arena/core/time.hpp"
#include "arena/portfolio/portfolio.hpp"

namespace arena::agent {

inline constexpr int kDecisionLogVersion = 1;
/// Field excluded from replay digests.
inline constexpr const char* kWallTimeField = "wall_time";

struct TraceEntry {
    nlohmann::json request;
    nlohmann::json response;

    bool operator==(const TraceEntry&) const = default;
};

/// Everything that happened at one decision point.
struct DecisionRecord {
    int index = 0;
    Timestamp clock;
    Timestamp mark_ts;  // period close the valuation is marked at
    std::vector<std::string> reasoning;
    std::vector<TraceEntry> tool_trace;
    std::vector<portfolio::Fill> fills;
    int rejections = 0;
    portfolio::PortfolioState end_positions;
    double end_valuation = 0.0;
    std::optional<std::string> fault;
    std::string wall_time;

    bool operator==(const DecisionRecord&) const = default;
};

struct EquityPoint {
    Timestamp ts;
    double valuation = 0.0;

    bool operator==(const EquityPoint&) const = default;
};

struct SessionResult {
    std::vector<DecisionRecord> records;
    std::vector<EquityPoint> equity_curve;
    std::string config_digest;
};

nlohmann::json to_json(const DecisionRecord& record);
/// Throws Error(corrupt_log) on schema violations.
DecisionRecord record_from_json(const nlohmann::json& j);

}  // namespace arena::agent
