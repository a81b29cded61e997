#include "arena/toolserver/session.hpp"

#include <algorithm>
#include <chrono>

#include "arena/core/error.hpp"
#include "arena/toolserver/expr.hpp"

namespace arena::toolserver {

namespace {

constexpr std::int64_t kMaxLookback = 500;
constexpr std::int64_t kMaxLimit = 100;
constexpr std::int64_t kDefaultLimit = 10;

[[noreturn]] void bad_params(const std::string& why) {
    throw Error(Errc::invalid_params, why);
}

void require_object(const nlohmann::json& params) {
    if (!params.is_object()) {
        bad_params("params must be an object");
    }
}

std::optional<std::string> opt_string(const nlohmann::json& params, const char* key) {
    auto it = params.find(key);
    if (it == params.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_string()) {
        bad_params(std::string("'") + key + "' must be a string");
    }
    return it->get<std::string>();
}

std::string req_string(const nlohmann::json& params, const char* key) {
    auto v = opt_string(params, key);
    if (!v) {
        bad_params(std::string("missing '") + key + "'");
    }
    return *v;
}

std::int64_t opt_int(const nlohmann::json& params, const char* key, std::int64_t fallback, std::int64_t lo,
                     std::int64_t hi) {
    auto it = params.find(key);
    if (it == params.end() || it->is_null()) {
        return fallback;
    }
    if (!it->is_number_integer()) {
        bad_params(std::string("'") + key + "' must be an integer");
    }
    auto v = it->get<std::int64_t>();
    if (v < lo || v > hi) {
        bad_params(std::string("'") + key + "' must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
}

std::string wall_clock_now() {
    return format_timestamp(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

}  // namespace

Session::Session(std::string token, const market::MarketSpec& spec, const data::DataStore& store,
                 const SessionConfig& config)
    : token_(std::move(token)), spec_(spec), store_(store), config_(config) {
    if (!(config.start < config.end)) {
        throw Error(Errc::config_error, "window start must precede window end");
    }
    if (!(config.initial_cash > 0.0)) {
        throw Error(Errc::config_error, "initial_cash must be positive");
    }
    if (config.tool_budget < 1) {
        throw Error(Errc::config_error, "tool_budget must be at least 1");
    }
    schedule_ = spec.calendar.decision_times(spec.frequency, config.start, config.end);
    if (schedule_.empty()) {
        throw Error(Errc::config_error, "window contains no decision times");
    }
    if (!store.has_symbol(spec.baseline_symbol)) {
        throw Error(Errc::config_error, "baseline symbol '" + spec.baseline_symbol + "' has no data");
    }
    auto baseline = store.series(spec.baseline_symbol);
    if (baseline.front().ts > schedule_.front()) {
        throw Error(Errc::config_error, "window starts at " + format_timestamp(schedule_.front()) +
                                            ", before the first bar at " + format_timestamp(baseline.front().ts));
    }
    if (baseline.back().ts < schedule_.back()) {
        throw Error(Errc::config_error, "window ends at " + format_timestamp(schedule_.back()) +
                                            ", after the last bar at " + format_timestamp(baseline.back().ts));
    }
    for (Timestamp t : schedule_) {
        const auto& bar = store.price_at(spec.baseline_symbol, t);
        if (bar.ts != t) {
            throw Error(Errc::data_gap, "no " + spec.baseline_symbol + " bar at decision time " + format_timestamp(t));
        }
    }
    clock_ = schedule_.front();
    budget_ = config.tool_budget;
    portfolio_.cash = config.initial_cash;
}

nlohmann::json Session::handle(const ToolRequest& request) {
    if (finished_) {
        return make_error(request.id, codes::session_closed, "session has completed its window");
    }
    if (request.id <= last_id_) {
        return make_error(request.id, codes::invalid_request,
                          "request id " + std::to_string(request.id) + " does not increase");
    }
    last_id_ = request.id;
    if (request.reasoning && !request.reasoning->empty()) {
        draft_.reasoning.push_back(*request.reasoning);
        draft_active_ = true;
    }
    if (request.method == "stop") {
        return dispatch(request);
    }
    nlohmann::json response = dispatch(request);
    draft_.tool_trace.push_back({request.to_json(), response});
    draft_active_ = true;
    return response;
}

nlohmann::json Session::dispatch(const ToolRequest& request) {
    const auto& method = request.method;
    if (!is_known_method(method)) {
        return make_error(request.id, codes::unknown_method, "unknown method '" + method + "'");
    }
    if (is_budgeted_method(method)) {
        if (budget_ <= 0) {
            return make_error(request.id, codes::budget_exhausted,
                              "tool budget of " + std::to_string(config_.tool_budget) +
                                  " calls for this decision point is used up");
        }
        --budget_;
    }
    try {
        require_object(request.params);
        if (method == "observe") return make_result(request.id, observe());
        if (method == "stop") return make_result(request.id, do_stop(request));
        if (method == "check_price") return make_result(request.id, do_check_price(request.params));
        if (method == "search") return make_result(request.id, do_search(request.params));
        if (method == "news") return make_result(request.id, do_news(request.params));
        if (method == "math") return make_result(request.id, do_math(request.params));
        return do_trade(request);
    } catch (const Error& e) {
        return make_error(request.id, to_string(e.code()), e.what());
    } catch (const nlohmann::json::exception& e) {
        return make_error(request.id, codes::invalid_params, e.what());
    }
}

const market::Instrument& Session::tradable(const nlohmann::json& params) const {
    auto symbol = req_string(params, "symbol");
    const auto* inst = spec_.find(symbol);
    if (inst == nullptr || inst->kind == market::InstrumentKind::cash) {
        throw Error(Errc::unknown_symbol, "'" + symbol + "' is not in this market's universe");
    }
    return *inst;
}

nlohmann::json Session::do_check_price(const nlohmann::json& params) const {
    const auto& inst = tradable(params);
    auto lookback = opt_int(params, "lookback", 1, 1, kMaxLookback);
    if (!store_.has_symbol(inst.symbol)) {
        throw Error(Errc::no_data, "no bars for " + inst.symbol);
    }
    auto bars = store_.last_bars(inst.symbol, static_cast<std::size_t>(lookback), clock_);
    if (bars.empty()) {
        throw Error(Errc::no_data, "no bar for " + inst.symbol + " at or before " + format_timestamp(clock_));
    }
    nlohmann::json result = data::to_json(bars.back());
    nlohmann::json history = nlohmann::json::array();
    for (const auto& b : bars) {
        history.push_back(data::to_json(b));
    }
    result["bars"] = std::move(history);
    return result;
}

nlohmann::json Session::do_search(const nlohmann::json& params) const {
    auto query = req_string(params, "query");
    auto limit = opt_int(params, "limit", kDefaultLimit, 1, kMaxLimit);
    nlohmann::json docs = nlohmann::json::array();
    for (const auto& d : store_.search_docs(query, clock_, static_cast<std::size_t>(limit))) {
        docs.push_back(data::to_json(d));
    }
    return {{"documents", std::move(docs)}};
}

nlohmann::json Session::do_news(const nlohmann::json& params) const {
    auto symbol = opt_string(params, "symbol");
    std::optional<Timestamp> since;
    if (auto s = opt_string(params, "since")) {
        auto ts = parse_timestamp(*s);
        if (!ts) {
            bad_params("'since' must be an RFC 3339 timestamp");
        }
        since = *ts;
    }
    auto limit = opt_int(params, "limit", kDefaultLimit, 1, kMaxLimit);
    nlohmann::json items = nlohmann::json::array();
    for (const auto& n : store_.news_query(symbol, since, clock_, static_cast<std::size_t>(limit))) {
        items.push_back(data::to_json(n));
    }
    return {{"items", std::move(items)}};
}

nlohmann::json Session::do_math(const nlohmann::json& params) const {
    auto expr = req_string(params, "expr");
    if (expr.size() > kMaxExpressionLength) {
        bad_params("expr exceeds " + std::to_string(kMaxExpressionLength) + " characters");
    }
    return {{"value", eval_expr(expr)}};
}

nlohmann::json Session::do_trade(const ToolRequest& request) {
    const auto& params = request.params;
    auto action = req_string(params, "action");
    if (action != "buy" && action != "sell") {
        bad_params("action must be 'buy' or 'sell'");
    }
    const auto& inst = tradable(params);
    auto qty_it = params.find("qty");
    if (qty_it == params.end() || !qty_it->is_number()) {
        bad_params("'qty' must be a number");
    }
    portfolio::Order order{action == "buy" ? portfolio::Side::buy : portfolio::Side::sell, inst.symbol,
                           qty_it->get<double>()};
    if (!store_.has_symbol(inst.symbol)) {
        throw Error(Errc::no_data, "no bars for " + inst.symbol);
    }
    auto current = store_.last_bars(inst.symbol, 1, clock_);
    if (current.empty() || current.back().ts != clock_) {
        throw Error(Errc::no_data, "no " + inst.symbol + " bar opens at " + format_timestamp(clock_));
    }
    auto outcome = portfolio::execute(portfolio_, order, current.back().open, clock_, spec_);
    if (auto* rejection = std::get_if<portfolio::Rejection>(&outcome)) {
        ++draft_.rejections;
        return make_error(request.id, portfolio::to_string(rejection->kind), rejection->message);
    }
    auto& done = std::get<portfolio::Execution>(outcome);
    portfolio_ = std::move(done.state);
    draft_.fills.push_back(done.fill);
    return make_result(request.id, {{"fill", portfolio::to_json(done.fill)}, {"positions", portfolio::snapshot(portfolio_)}});
}

nlohmann::json Session::do_stop(const ToolRequest& request) {
    if (auto fault = opt_string(request.params, "fault")) {
        draft_.fault = *fault;
    }
    const Timestamp closed = clock_;
    close_decision();
    const double value = records_.back().end_valuation;
    nlohmann::json result = {{"closed", format_timestamp(closed)}, {"end_valuation", value}};
    if (cursor_ + 1 < schedule_.size()) {
        ++cursor_;
        clock_ = schedule_[cursor_];
        budget_ = config_.tool_budget;
        result["next_clock"] = format_timestamp(clock_);
        result["done"] = false;
    } else {
        finished_ = true;
        result["next_clock"] = nullptr;
        result["done"] = true;
    }
    return result;
}

nlohmann::json Session::observe() const {
    nlohmann::json prev = nlohmann::json::object();
    nlohmann::json buy = nlohmann::json::object();
    nlohmann::json gaps = nlohmann::json::array();
    for (const auto& symbol : spec_.tradable_symbols()) {
        bool complete = false;
        if (store_.has_symbol(symbol)) {
            auto upto_now = store_.last_bars(symbol, 2, clock_);
            const bool has_current = !upto_now.empty() && upto_now.back().ts == clock_;
            const data::Bar* before = nullptr;
            if (has_current && upto_now.size() == 2) {
                before = &upto_now.front();
            } else if (!has_current && !upto_now.empty()) {
                before = &upto_now.back();
            }
            if (before != nullptr) {
                prev[symbol] = before->close;
            }
            if (has_current) {
                buy[symbol] = upto_now.back().open;
            }
            complete = before != nullptr && has_current;
        }
        if (!complete) {
            gaps.push_back(symbol);
        }
    }
    return {{"session", token_},
            {"clock", format_timestamp(clock_)},
            {"decision_index", cursor_},
            {"positions", portfolio::snapshot(portfolio_)},
            {"previous_close_prices", std::move(prev)},
            {"current_buy_prices", std::move(buy)},
            {"gaps", std::move(gaps)},
            {"budget", budget_},
            {"window_end", format_timestamp(schedule_.back())}};
}

void Session::close_decision() {
    portfolio::Prices closes;
    for (const auto& [symbol, qty] : portfolio_.holdings) {
        closes[symbol] = store_.price_at(symbol, clock_).close;
    }
    draft_.index = static_cast<int>(cursor_);
    draft_.clock = clock_;
    draft_.mark_ts = spec_.calendar.period_end(spec_.frequency, clock_);
    draft_.end_positions = portfolio_;
    draft_.end_valuation = portfolio::valuation(portfolio_, closes);
    draft_.wall_time = wall_clock_now();
    equity_.push_back({draft_.mark_ts, draft_.end_valuation});
    records_.push_back(std::move(draft_));
    draft_ = {};
    draft_active_ = false;
}

void Session::close_pending() {
    if (draft_active_ && !finished_) {
        close_decision();
    }
}

void Session::advance_clock(Timestamp to) {
    if (to <= clock_) {
        throw Error(Errc::clock_regression,
                    "cannot move clock from " + format_timestamp(clock_) + " to " + format_timestamp(to));
    }
    if (!spec_.calendar.is_decision_time(spec_.frequency, to) || to > schedule_.back()) {
        throw Error(Errc::not_a_decision_time, format_timestamp(to) + " is not a decision time of this run");
    }
    if (draft_active_) {
        close_decision();
    }
    cursor_ = static_cast<std::size_t>(std::lower_bound(schedule_.begin(), schedule_.end(), to) - schedule_.begin());
    clock_ = to;
    budget_ = config_.tool_budget;
}

agent::SessionResult Session::result() const {
    agent::SessionResult out;
    out.records = records_;
    out.equity_curve = equity_;
    return out;
}

}  // namespace arena::toolserver
