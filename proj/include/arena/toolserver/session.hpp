#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "arena/agent/decision_record.hpp"
#include "arena/core/time.hpp"
#include "arena/data/datastore.hpp"
#include "arena/market/market_spec.hpp"
#include "arena/portfolio/portfolio.hpp"
#include "arena/toolserver/protocol.hpp"

namespace arena::toolserver {

inline constexpr int kDefaultToolBudget = 20;

struct SessionConfig {
    Timestamp start;
    Timestamp end;
    double initial_cash = 10000.0;
    int tool_budget = kDefaultToolBudget;
};

/// One agent's view of the environment: a simulated clock walking the run's
/// decision schedule, a portfolio, and the open decision's audit trail.
///
/// Every datastore query issued through `handle` uses the session clock as
/// t_now. A `stop` request closes the current decision point (marking the
/// portfolio at the period close) and advances to the next decision time.
/// Not thread-safe; ToolServer serializes access per session.
class Session {
public:
    /// Throws Error(config_error) when the window is empty or not covered by
    /// baseline data, Error(data_gap) when a decision time has no baseline bar.
    Session(std::string token, const market::MarketSpec& spec, const data::DataStore& store,
            const SessionConfig& config);

    const std::string& token() const noexcept { return token_; }
    Timestamp clock() const noexcept { return clock_; }
    int budget() const noexcept { return budget_; }
    bool finished() const noexcept { return finished_; }
    std::size_t decision_index() const noexcept { return cursor_; }
    const std::vector<Timestamp>& schedule() const noexcept { return schedule_; }
    const portfolio::PortfolioState& portfolio() const noexcept { return portfolio_; }
    const market::MarketSpec& spec() const noexcept { return spec_; }
    const std::vector<agent::DecisionRecord>& records() const noexcept { return records_; }

    nlohmann::json handle(const ToolRequest& request);

    /// Moves the clock forward to a later decision time inside the window and
    /// resets the tool budget. Any open decision is closed first. Throws
    /// Error(clock_regression) or Error(not_a_decision_time).
    void advance_clock(Timestamp to);

    /// The observe payload: clock, positions, previous closes, buy prices.
    nlohmann::json observe() const;

    /// Closes an open decision that has activity (used when a client leaves).
    void close_pending();

    agent::SessionResult result() const;

private:
    nlohmann::json dispatch(const ToolRequest& request);
    nlohmann::json do_check_price(const nlohmann::json& params) const;
    nlohmann::json do_search(const nlohmann::json& params) const;
    nlohmann::json do_news(const nlohmann::json& params) const;
    nlohmann::json do_math(const nlohmann::json& params) const;
    nlohmann::json do_trade(const ToolRequest& request);
    nlohmann::json do_stop(const ToolRequest& request);

    void close_decision();
    const market::Instrument& tradable(const nlohmann::json& params) const;

    std::string token_;
    const market::MarketSpec& spec_;
    const data::DataStore& store_;
    SessionConfig config_;
    std::vector<Timestamp> schedule_;
    std::size_t cursor_ = 0;
    Timestamp clock_;
    int budget_ = 0;
    bool finished_ = false;
    std::int64_t last_id_ = 0;
    portfolio::PortfolioState portfolio_;

    agent::DecisionRecord draft_;
    bool draft_active_ = false;
    std::vector<agent::DecisionRecord> records_;
    std::vector<agent::EquityPoint> equity_;
};

}  // namespace arena::toolserver
