#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "arena/core/time.hpp"
#include "arena/market/market_spec.hpp"

namespace arena::portfolio {

/// Holdings plus cash. Quantities and cash are never negative; a fully sold
/// position is removed from `holdings`.
struct PortfolioState {
    std::map<std::string, double> holdings;
    double cash = 0.0;

    bool operator==(const PortfolioState&) const = default;
};

/// `{"CASH": <cash>, "<TICKER>": <qty>, ...}`
nlohmann::json snapshot(const PortfolioState& state);
PortfolioState from_snapshot(const nlohmann::json& snapshot);

enum class Side { buy, sell };

std::string_view to_string(Side side) noexcept;

struct Order {
    Side action = Side::buy;
    std::string symbol;
    double qty = 0.0;

    bool operator==(const Order&) const = default;
};

struct Fill {
    Order order;
    double price = 0.0;
    Timestamp ts;
    double cash_delta = 0.0;
    double resulting_cash = 0.0;
    double fee = 0.0;

    bool operator==(const Fill&) const = default;
};

nlohmann::json to_json(const Fill& fill);
Fill fill_from_json(const nlohmann::json& j);

enum class RejectionKind {
    non_positive_quantity,
    lot_size_violation,
    fractional_quantity,
    insufficient_liquidity,
    insufficient_holdings,
    market_closed,
};

/// snake_case wire code, e.g. "insufficient_liquidity".
std::string_view to_string(RejectionKind kind) noexcept;

struct Rejection {
    RejectionKind kind;
    std::string message;
};

using Prices = std::map<std::string, double, std::less<>>;

/// cash + sum(qty * price). Throws Error(missing_price) for an unpriced holding.
double valuation(const PortfolioState& state, const Prices& prices);

/// nullopt when the order may execute at `exec_price`. Throws
/// Error(unknown_symbol) for symbols outside the tradable universe.
std::optional<Rejection> validate_order(const PortfolioState& state, const Order& order, double exec_price,
                                        const market::MarketSpec& spec);

struct Execution {
    PortfolioState state;
    Fill fill;
};

/// Fills the whole order or rejects it; the input state is never modified.
std::variant<Execution, Rejection> execute(const PortfolioState& state, const Order& order, double exec_price,
                                           Timestamp ts, const market::MarketSpec& spec);

}  // namespace arena::portfolio
