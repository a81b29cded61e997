#include "arena/agent/scripted.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <random>

#include "arena/core/error.hpp"
#include "arena/toolserver/protocol.hpp"

namespace arena::agent {

namespace {

using portfolio::Order;
using portfolio::Side;

constexpr std::size_t kDefaultSymbolCap = 10;

std::string money(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

double lot_of(const market::MarketSpec& spec) {
    if (spec.quantity_granularity == market::Granularity::fractional) {
        return 0.0;
    }
    return static_cast<double>(spec.lot_size.value_or(1));
}

double cost_of(double qty, double price, const market::MarketSpec& spec) {
    const double notional = qty * price;
    return notional + notional * spec.fee_rate;
}

[[noreturn]] void invalid(const std::string& why) {
    throw Error(Errc::invalid_params, why);
}

std::vector<std::string> symbols_param(const nlohmann::json& params, const market::MarketSpec& spec,
                                       std::vector<std::string> fallback) {
    std::vector<std::string> out;
    if (params.contains("symbols")) {
        if (!params["symbols"].is_array() || params["symbols"].empty()) {
            invalid("'symbols' must be a non-empty array");
        }
        for (const auto& s : params["symbols"]) {
            if (!s.is_string()) {
                invalid("'symbols' entries must be strings");
            }
            out.push_back(s.get<std::string>());
        }
    } else {
        out = std::move(fallback);
    }
    for (const auto& s : out) {
        const auto* inst = spec.find(s);
        if (inst == nullptr || inst->kind == market::InstrumentKind::cash) {
            invalid("'" + s + "' is not tradable in this market");
        }
    }
    return out;
}

std::vector<std::string> default_symbols(const market::MarketSpec& spec) {
    auto all = spec.tradable_symbols();
    if (all.size() > kDefaultSymbolCap) {
        all.resize(kDefaultSymbolCap);
    }
    return all;
}

std::int64_t int_param(const nlohmann::json& params, const char* key, std::optional<std::int64_t> fallback,
                       std::int64_t lo, std::int64_t hi) {
    if (!params.contains(key)) {
        if (!fallback) {
            invalid(std::string("missing '") + key + "'");
        }
        return *fallback;
    }
    if (!params[key].is_number_integer()) {
        invalid(std::string("'") + key + "' must be an integer");
    }
    auto v = params[key].get<std::int64_t>();
    if (v < lo || v > hi) {
        invalid(std::string("'") + key + "' must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
}

/// Shared machinery: optionally gather tool results, then work through a
/// queue of orders. Unaffordable buys are halved and retried; other
/// rejections drop the order.
class PlannedPolicy : public Policy {
public:
    explicit PlannedPolicy(const market::MarketSpec& spec) : spec_(spec) {}

    PolicyStep next(const Observation& obs, std::span<const TraceEntry> transcript) final {
        if (!started_ || obs.clock != clock_) {
            started_ = true;
            clock_ = obs.clock;
            gather_calls_ = gather(obs);
            gather_results_.clear();
            orders_.clear();
            planned_ = false;
            awaiting_ = Awaiting::nothing;
            filled_ = 0;
            corrected_ = 0;
            rationale_.clear();
        }
        if (awaiting_ != Awaiting::nothing && !transcript.empty()) {
            absorb(transcript.back().response);
        }
        if (gather_results_.size() < gather_calls_.size()) {
            awaiting_ = Awaiting::gather;
            const auto& call = gather_calls_[gather_results_.size()];
            return PolicyStep::tool(call.method, call.params);
        }
        if (!planned_) {
            planned_ = true;
            auto orders = plan(obs, gather_results_, rationale_);
            orders_.assign(orders.begin(), orders.end());
        }
        if (orders_.empty()) {
            awaiting_ = Awaiting::nothing;
            std::string summary = std::to_string(filled_) + " order(s) filled";
            if (corrected_ > 0) {
                summary += ", " + std::to_string(corrected_) + " resized after rejection";
            }
            return PolicyStep::stop(rationale_.empty() ? summary : rationale_ + "; " + summary);
        }
        awaiting_ = Awaiting::trade;
        const Order& o = orders_.front();
        return PolicyStep::tool("trade", {{"action", portfolio::to_string(o.action)}, {"symbol", o.symbol}, {"qty", o.qty}});
    }

protected:
    virtual std::vector<ToolCall> gather(const Observation&) { return {}; }
    virtual std::vector<Order> plan(const Observation& obs, const std::vector<nlohmann::json>& gathered,
                                    std::string& rationale) = 0;

    const market::MarketSpec& spec_;

private:
    enum class Awaiting { nothing, gather, trade };

    void absorb(const nlohmann::json& response) {
        if (awaiting_ == Awaiting::gather) {
            gather_results_.push_back(toolserver::is_error(response) ? nlohmann::json(nullptr) : response["result"]);
            return;
        }
        if (awaiting_ != Awaiting::trade || orders_.empty()) {
            return;
        }
        Order& front = orders_.front();
        if (!toolserver::is_error(response)) {
            ++filled_;
            orders_.pop_front();
            return;
        }
        if (toolserver::error_code(response) == "insufficient_liquidity" && front.action == Side::buy) {
            double smaller = round_quantity(front.qty / 2.0, spec_);
            if (smaller > 0.0 && smaller < front.qty) {
                front.qty = smaller;
                ++corrected_;
                return;
            }
        }
        orders_.pop_front();
    }

    bool started_ = false;
    Timestamp clock_;
    std::vector<ToolCall> gather_calls_;
    std::vector<nlohmann::json> gather_results_;
    std::deque<Order> orders_;
    bool planned_ = false;
    Awaiting awaiting_ = Awaiting::nothing;
    int filled_ = 0;
    int corrected_ = 0;
    std::string rationale_;
};

class BuyAndHold final : public PlannedPolicy {
public:
    BuyAndHold(const market::MarketSpec& spec, std::vector<std::string> symbols)
        : PlannedPolicy(spec), symbols_(std::move(symbols)) {}

protected:
    std::vector<Order> plan(const Observation& obs, const std::vector<nlohmann::json>&, std::string& rationale) override {
        if (obs.decision_index != 0) {
            rationale = "buy-and-hold: holding";
            return {};
        }
        std::vector<Order> orders;
        double cash = obs.positions.cash;
        std::size_t remaining = symbols_.size();
        for (const auto& s : symbols_) {
            auto it = obs.buy_price.find(s);
            if (it == obs.buy_price.end()) {
                --remaining;
                continue;
            }
            double budget = cash / static_cast<double>(remaining--);
            double qty = affordable_quantity(budget, it->second, spec_);
            if (qty > 0.0) {
                orders.push_back({Side::buy, s, qty});
                cash -= cost_of(qty, it->second, spec_);
            }
        }
        rationale = "buy-and-hold: investing " + money(obs.positions.cash) + " cash in " +
                    std::to_string(orders.size()) + " symbol(s)";
        return orders;
    }

private:
    std::vector<std::string> symbols_;
};

class EqualWeight final : public PlannedPolicy {
public:
    EqualWeight(const market::MarketSpec& spec, std::vector<std::string> symbols, int every)
        : PlannedPolicy(spec), symbols_(std::move(symbols)), every_(every) {}

protected:
    std::vector<Order> plan(const Observation& obs, const std::vector<nlohmann::json>&, std::string& rationale) override {
        if (obs.decision_index % every_ != 0) {
            rationale = "equal-weight: not a rebalance period";
            return {};
        }
        double total = obs.positions.cash;
        for (const auto& [symbol, qty] : obs.positions.holdings) {
            auto it = obs.buy_price.find(symbol);
            if (it == obs.buy_price.end()) {
                rationale = "equal-weight: no price for held " + symbol + ", skipping rebalance";
                return {};
            }
            total += qty * it->second;
        }
        std::vector<Order> sells;
        std::vector<Order> buys;
        double cash = obs.positions.cash;
        for (const auto& [symbol, qty] : obs.positions.holdings) {
            if (std::find(symbols_.begin(), symbols_.end(), symbol) == symbols_.end()) {
                sells.push_back({Side::sell, symbol, qty});
                cash += qty * obs.buy_price.at(symbol) * (1.0 - spec_.fee_rate);
            }
        }
        const double target_value = total / static_cast<double>(symbols_.size());
        for (const auto& s : symbols_) {
            auto it = obs.buy_price.find(s);
            if (it == obs.buy_price.end()) {
                continue;
            }
            const double price = it->second;
            auto held_it = obs.positions.holdings.find(s);
            const double held = held_it == obs.positions.holdings.end() ? 0.0 : held_it->second;
            const double target = round_quantity(target_value / price, spec_);
            if (target < held) {
                double qty = round_quantity(held - target, spec_);
                if (target == 0.0 || qty > held) {
                    qty = held;
                }
                if (qty > 0.0) {
                    sells.push_back({Side::sell, s, qty});
                    cash += qty * price * (1.0 - spec_.fee_rate);
                }
            } else if (target > held) {
                double qty = round_quantity(target - held, spec_);
                if (qty > 0.0) {
                    buys.push_back({Side::buy, s, qty});
                }
            }
        }
        for (auto& b : buys) {
            const double price = obs.buy_price.at(b.symbol);
            b.qty = std::min(b.qty, affordable_quantity(cash, price, spec_));
            cash -= cost_of(b.qty, price, spec_);
        }
        std::erase_if(buys, [](const Order& o) { return o.qty <= 0.0; });
        sells.insert(sells.end(), buys.begin(), buys.end());
        rationale = "equal-weight: rebalancing " + money(total) + " across " + std::to_string(symbols_.size()) +
                    " symbol(s)";
        return sells;
    }

private:
    std::vector<std::string> symbols_;
    int every_;
};

class RandomTrader final : public PlannedPolicy {
public:
    RandomTrader(const market::MarketSpec& spec, std::uint64_t seed, double probability, int max_orders)
        : PlannedPolicy(spec), seed_(seed), probability_(probability), max_orders_(max_orders) {}

protected:
    std::vector<Order> plan(const Observation& obs, const std::vector<nlohmann::json>&, std::string& rationale) override {
        std::mt19937_64 rng(seed_ ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(obs.decision_index + 1)));
        auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

        std::vector<std::string> priced;
        for (const auto& [symbol, price] : obs.buy_price) {
            priced.push_back(symbol);
        }
        if (priced.empty() || unit() >= probability_) {
            rationale = "random: no trade this period";
            return {};
        }
        const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_orders_));
        std::vector<Order> orders;
        std::map<std::string, double> held(obs.positions.holdings.begin(), obs.positions.holdings.end());
        for (int k = 0; k < n; ++k) {
            const auto& symbol = priced[rng() % priced.size()];
            const double price = obs.buy_price.at(symbol);
            const double have = held[symbol];
            if (have > 0.0 && unit() < 0.5) {
                double qty = round_quantity(have * (0.25 + 0.75 * unit()), spec_);
                if (qty <= 0.0) {
                    qty = have;
                }
                orders.push_back({Side::sell, symbol, qty});
                held[symbol] = have - qty;
            } else {
                // Up to 1.5x an even share of cash, so some orders exceed what is
                // affordable and go through the rejection/resize path.
                const double budget = obs.positions.cash / static_cast<double>(n) * (0.05 + 1.45 * unit());
                double qty = round_quantity(budget / price, spec_);
                if (qty <= 0.0) {
                    qty = lot_of(spec_) > 0.0 ? lot_of(spec_) : budget / price;
                }
                if (qty > 0.0) {
                    orders.push_back({Side::buy, symbol, qty});
                }
            }
        }
        rationale = "random: " + std::to_string(orders.size()) + " order(s) drawn";
        return orders;
    }

private:
    std::uint64_t seed_;
    double probability_;
    int max_orders_;
};

class Momentum final : public PlannedPolicy {
public:
    Momentum(const market::MarketSpec& spec, int lookback, int top_k, std::vector<std::string> symbols)
        : PlannedPolicy(spec), lookback_(lookback), top_k_(top_k), symbols_(std::move(symbols)) {}

protected:
    std::vector<ToolCall> gather(const Observation&) override {
        std::vector<ToolCall> calls;
        for (const auto& s : symbols_) {
            calls.push_back({"check_price", {{"symbol", s}, {"lookback", lookback_ + 1}}});
        }
        return calls;
    }

    std::vector<Order> plan(const Observation& obs, const std::vector<nlohmann::json>& gathered,
                            std::string& rationale) override {
        std::vector<std::pair<double, std::string>> scores;
        const std::string now = format_timestamp(obs.clock);
        for (std::size_t i = 0; i < symbols_.size() && i < gathered.size(); ++i) {
            if (gathered[i].is_null() || !gathered[i].contains("bars")) {
                continue;
            }
            // Only completed bars: the decision bar's close is not known yet.
            std::vector<double> closes;
            for (const auto& bar : gathered[i]["bars"]) {
                if (bar.value("ts", "") < now) {
                    closes.push_back(bar.value("close", 0.0));
                }
            }
            if (closes.size() < 2 || closes.front() <= 0.0) {
                continue;
            }
            scores.emplace_back(closes.back() / closes.front() - 1.0, symbols_[i]);
        }
        std::stable_sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        std::vector<std::string> targets;
        for (const auto& [score, symbol] : scores) {
            if (static_cast<int>(targets.size()) == top_k_ || score <= 0.0) {
                break;
            }
            if (obs.buy_price.count(symbol) != 0) {
                targets.push_back(symbol);
            }
        }
        std::vector<Order> orders;
        double cash = obs.positions.cash;
        for (const auto& [symbol, qty] : obs.positions.holdings) {
            auto price = obs.buy_price.find(symbol);
            if (std::find(targets.begin(), targets.end(), symbol) == targets.end() && price != obs.buy_price.end()) {
                orders.push_back({Side::sell, symbol, qty});
                cash += qty * price->second * (1.0 - spec_.fee_rate);
            }
        }
        std::vector<std::string> new_targets;
        for (const auto& t : targets) {
            if (obs.positions.holdings.count(t) == 0) {
                new_targets.push_back(t);
            }
        }
        std::size_t remaining = new_targets.size();
        for (const auto& t : new_targets) {
            const double price = obs.buy_price.at(t);
            double qty = affordable_quantity(cash / static_cast<double>(remaining--), price, spec_);
            if (qty > 0.0) {
                orders.push_back({Side::buy, t, qty});
                cash -= cost_of(qty, price, spec_);
            }
        }
        rationale = "momentum: " + std::to_string(targets.size()) + " symbol(s) with positive " +
                    std::to_string(lookback_) + "-period return";
        return orders;
    }

private:
    int lookback_;
    int top_k_;
    std::vector<std::string> symbols_;
};

}  // namespace

double round_quantity(double qty, const market::MarketSpec& spec) {
    if (!(qty > 0.0) || !std::isfinite(qty)) {
        return 0.0;
    }
    const double lot = lot_of(spec);
    if (lot == 0.0) {
        return qty;
    }
    return std::floor(qty / lot) * lot;
}

double affordable_quantity(double cash, double price, const market::MarketSpec& spec) {
    if (!(cash > 0.0) || !(price > 0.0)) {
        return 0.0;
    }
    const double lot = lot_of(spec);
    double qty = round_quantity(cash / (price * (1.0 + spec.fee_rate)), spec);
    while (qty > 0.0 && cost_of(qty, price, spec) > cash) {
        qty = lot == 0.0 ? std::nextafter(qty, 0.0) : qty - lot;
    }
    return std::max(qty, 0.0);
}

std::unique_ptr<Policy> make_scripted_policy(std::string_view kind, const nlohmann::json& params,
                                             const market::MarketSpec& spec) {
    const nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;
    if (!p.is_object()) {
        invalid("policy params must be an object");
    }
    if (kind == "buy_and_hold") {
        return std::make_unique<BuyAndHold>(spec, symbols_param(p, spec, {spec.baseline_symbol}));
    }
    if (kind == "equal_weight") {
        auto every = int_param(p, "rebalance_every", 1, 1, 1'000'000);
        return std::make_unique<EqualWeight>(spec, symbols_param(p, spec, default_symbols(spec)), static_cast<int>(every));
    }
    if (kind == "random") {
        auto seed = int_param(p, "seed", std::nullopt, 0, INT64_MAX);
        double prob = p.value("trade_probability", 0.5);
        if (!(prob >= 0.0 && prob <= 1.0)) {
            invalid("'trade_probability' must be in [0, 1]");
        }
        auto max_orders = int_param(p, "max_orders", 3, 1, 10);
        return std::make_unique<RandomTrader>(spec, static_cast<std::uint64_t>(seed), prob, static_cast<int>(max_orders));
    }
    if (kind == "momentum") {
        auto lookback = int_param(p, "lookback", std::nullopt, 1, 400);
        auto top_k = int_param(p, "top_k", 3, 1, 10);
        auto symbols = symbols_param(p, spec, default_symbols(spec));
        return std::make_unique<Momentum>(spec, static_cast<int>(lookback), static_cast<int>(top_k), std::move(symbols));
    }
    invalid("unknown scripted policy '" + std::string(kind) + "'");
}

}  // namespace arena::agent
