#include "arena/portfolio/portfolio.hpp"

#include <cmath>
#include <sstream>

#include "arena/core/error.hpp"

namespace arena::portfolio {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

nlohmann::json snapshot(const PortfolioState& state) {
    nlohmann::json j = nlohmann::json::object();
    j[std::string(market::kCashSymbol)] = state.cash;
    for (const auto& [symbol, qty] : state.holdings) {
        j[symbol] = qty;
    }
    return j;
}

PortfolioState from_snapshot(const nlohmann::json& snap) {
    if (!snap.is_object()) {
        throw Error(Errc::invalid_params, "portfolio snapshot must be an object");
    }
    PortfolioState state;
    for (const auto& [key, value] : snap.items()) {
        if (!value.is_number()) {
            throw Error(Errc::invalid_params, "snapshot value for " + key + " is not a number");
        }
        if (key == market::kCashSymbol) {
            state.cash = value.get<double>();
        } else {
            state.holdings[key] = value.get<double>();
        }
    }
    return state;
}

std::string_view to_string(Side side) noexcept {
    return side == Side::buy ? "buy" : "sell";
}

std::string_view to_string(RejectionKind kind) noexcept {
    switch (kind) {
        case RejectionKind::non_positive_quantity: return "non_positive_quantity";
        case RejectionKind::lot_size_violation: return "lot_size_violation";
        case RejectionKind::fractional_quantity: return "fractional_quantity";
        case RejectionKind::insufficient_liquidity: return "insufficient_liquidity";
        case RejectionKind::insufficient_holdings: return "insufficient_holdings";
        case RejectionKind::market_closed: return "market_closed";
    }
    return "rejected";
}

nlohmann::json to_json(const Fill& fill) {
    return {{"action", to_string(fill.order.action)},
            {"symbol", fill.order.symbol},
            {"qty", fill.order.qty},
            {"price", fill.price},
            {"ts", format_timestamp(fill.ts)},
            {"cash_delta", fill.cash_delta},
            {"resulting_cash", fill.resulting_cash},
            {"fee", fill.fee}};
}

Fill fill_from_json(const nlohmann::json& j) {
    Fill f;
    auto action = j.at("action").get<std::string>();
    if (action != "buy" && action != "sell") {
        throw Error(Errc::invalid_params, "fill action must be buy or sell");
    }
    f.order.action = action == "buy" ? Side::buy : Side::sell;
    f.order.symbol = j.at("symbol").get<std::string>();
    f.order.qty = j.at("qty").get<double>();
    f.price = j.at("price").get<double>();
    f.ts = parse_timestamp_or_throw(j.at("ts").get<std::string>());
    f.cash_delta = j.at("cash_delta").get<double>();
    f.resulting_cash = j.at("resulting_cash").get<double>();
    f.fee = j.value("fee", 0.0);
    return f;
}

double valuation(const PortfolioState& state, const Prices& prices) {
    double total = state.cash;
    for (const auto& [symbol, qty] : state.holdings) {
        auto it = prices.find(symbol);
        if (it == prices.end()) {
            throw Error(Errc::missing_price, "no price for held symbol " + symbol);
        }
        total += qty * it->second;
    }
    return total;
}

std::optional<Rejection> validate_order(const PortfolioState& state, const Order& order, double exec_price,
                                        const market::MarketSpec& spec) {
    const market::Instrument* inst = spec.find(order.symbol);
    if (inst == nullptr || inst->kind == market::InstrumentKind::cash) {
        throw Error(Errc::unknown_symbol, "'" + order.symbol + "' is not tradable in this market");
    }
    if (!(exec_price > 0.0) || !std::isfinite(exec_price)) {
        throw Error(Errc::invalid_params, "execution price must be positive");
    }
    if (!(order.qty > 0.0) || !std::isfinite(order.qty)) {
        return Rejection{RejectionKind::non_positive_quantity, "quantity must be positive, got " + num(order.qty)};
    }
    if (auto v = market::validate_quantity(spec, *inst, order.qty)) {
        auto kind = v->rule == market::QuantityRule::lot_size ? RejectionKind::lot_size_violation
                                                              : RejectionKind::fractional_quantity;
        return Rejection{kind, v->message + "; got " + num(order.qty)};
    }
    const double notional = order.qty * exec_price;
    if (order.action == Side::buy) {
        const double cost = notional + notional * spec.fee_rate;
        if (cost > state.cash) {
            return Rejection{RejectionKind::insufficient_liquidity,
                             "buying " + num(order.qty) + " " + order.symbol + " at " + num(exec_price) + " costs " +
                                 num(cost) + " but only " + num(state.cash) + " cash is available"};
        }
    } else {
        auto it = state.holdings.find(order.symbol);
        const double held = it == state.holdings.end() ? 0.0 : it->second;
        if (order.qty > held) {
            return Rejection{RejectionKind::insufficient_holdings,
                             "cannot sell " + num(order.qty) + " " + order.symbol + "; holding " + num(held)};
        }
    }
    return std::nullopt;
}

std::variant<Execution, Rejection> execute(const PortfolioState& state, const Order& order, double exec_price,
                                           Timestamp ts, const market::MarketSpec& spec) {
    if (auto rejection = validate_order(state, order, exec_price, spec)) {
        return *rejection;
    }
    if (!market::is_trading_time(spec, ts)) {
        return Rejection{RejectionKind::market_closed, "market is closed at " + format_timestamp(ts)};
    }
    Execution out{state, {}};
    const double notional = order.qty * exec_price;
    const double fee = notional * spec.fee_rate;
    double cash_delta = 0.0;
    if (order.action == Side::buy) {
        cash_delta = -(notional + fee);
        out.state.holdings[order.symbol] += order.qty;
    } else {
        cash_delta = notional - fee;
        auto it = out.state.holdings.find(order.symbol);
        it->second -= order.qty;
        if (it->second == 0.0) {
            out.state.holdings.erase(it);
        }
    }
    out.state.cash += cash_delta;
    out.fill = Fill{order, exec_price, ts, cash_delta, out.state.cash, fee};
    return out;
}

}  // namespace arena::portfolio
