#include "arena/market/market_spec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "arena/core/error.hpp"

namespace arena::market {

namespace {

using namespace std::chrono;

SessionWindow weekday_window(minutes open, minutes close) {
    SessionWindow w;
    for (int d = 1; d <= 5; ++d) {
        w.weekdays[d] = true;
    }
    w.open = open;
    w.close = close;
    return w;
}

std::string display_name_for(MarketId id, const std::string& symbol) {
    if (id == MarketId::crypto && symbol.size() > 4 && symbol.ends_with("USDT")) {
        return symbol.substr(0, symbol.size() - 4) + "/USDT";
    }
    return symbol;
}

[[noreturn]] void malformed(const std::filesystem::path& file, int line, const std::string& why) {
    throw Error(Errc::malformed_universe_file,
                file.string() + ":" + std::to_string(line) + ": " + why);
}

}  // namespace

std::string_view to_string(MarketId id) noexcept {
    switch (id) {
        case MarketId::us: return "us";
        case MarketId::ashare: return "ashare";
        case MarketId::crypto: return "crypto";
    }
    return "unknown";
}

MarketId parse_market_id(std::string_view text) {
    if (text == "us") return MarketId::us;
    if (text == "ashare") return MarketId::ashare;
    if (text == "crypto") return MarketId::crypto;
    throw Error(Errc::unknown_market, "unknown market '" + std::string(text) + "'");
}

const Instrument* MarketSpec::find(std::string_view symbol) const noexcept {
    auto it = std::find_if(universe.begin(), universe.end(),
                           [symbol](const Instrument& i) { return i.symbol == symbol; });
    return it == universe.end() ? nullptr : &*it;
}

std::vector<std::string> MarketSpec::tradable_symbols() const {
    std::vector<std::string> out;
    for (const auto& i : universe) {
        if (i.kind != InstrumentKind::cash) {
            out.push_back(i.symbol);
        }
    }
    return out;
}

TradingCalendar default_calendar(MarketId market_id) {
    switch (market_id) {
        case MarketId::us:
            return TradingCalendar({weekday_window(hours{9} + minutes{30}, hours{16})}, {}, hours{-5});
        case MarketId::ashare:
            return TradingCalendar({weekday_window(hours{9} + minutes{30}, hours{11} + minutes{30}),
                                    weekday_window(hours{13}, hours{15})},
                                   {}, hours{8});
        case MarketId::crypto:
            return TradingCalendar::continuous_utc();
    }
    throw Error(Errc::unknown_market, "unknown market");
}

double default_periods_per_year(const TradingCalendar& calendar, Frequency frequency) {
    const double days_per_year = calendar.continuous() ? 365.0 : 252.0;
    if (frequency == Frequency::daily) {
        return days_per_year;
    }
    return days_per_year * calendar.session_hours_per_day();
}

MarketSpec load_market_spec(MarketId market_id, const std::filesystem::path& universe_file,
                            const MarketOptions& options) {
    std::ifstream in(universe_file);
    if (!in) {
        throw Error(Errc::io_error, "no such file: " + universe_file.string());
    }

    MarketSpec spec;
    spec.market_id = market_id;
    const InstrumentKind kind =
        market_id == MarketId::crypto ? InstrumentKind::crypto_pair : InstrumentKind::equity;

    std::set<std::string> seen;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string text = raw.substr(0, raw.find('#'));
        std::istringstream words(text);
        std::string symbol;
        std::string extra;
        if (!(words >> symbol)) {
            continue;
        }
        if (words >> extra) {
            malformed(universe_file, line, "expected one ticker per line");
        }
        if (symbol == kCashSymbol) {
            malformed(universe_file, line, "CASH is reserved");
        }
        if (!seen.insert(symbol).second) {
            malformed(universe_file, line, "duplicate ticker " + symbol);
        }
        spec.universe.push_back({symbol, kind, display_name_for(market_id, symbol)});
    }
    if (spec.universe.empty()) {
        malformed(universe_file, line, "universe file lists no tickers");
    }
    spec.universe.push_back({std::string(kCashSymbol), InstrumentKind::cash, "Cash"});

    spec.calendar = options.calendar_file ? TradingCalendar::load(*options.calendar_file)
                                          : default_calendar(market_id);
    switch (market_id) {
        case MarketId::us:
            spec.lot_size = 1;
            spec.quantity_granularity = Granularity::integer_shares;
            spec.frequency = Frequency::hourly;
            spec.baseline_symbol = "QQQ";
            break;
        case MarketId::ashare:
            spec.lot_size = 100;
            spec.quantity_granularity = Granularity::integer_shares;
            spec.frequency = Frequency::daily;
            spec.baseline_symbol = "000016.SH";
            break;
        case MarketId::crypto:
            spec.lot_size.reset();
            spec.quantity_granularity = Granularity::fractional;
            spec.frequency = Frequency::daily;
            spec.baseline_symbol = "CD5";
            break;
    }
    if (options.frequency) {
        spec.frequency = *options.frequency;
    }
    if (options.baseline_symbol) {
        spec.baseline_symbol = *options.baseline_symbol;
    }
    spec.periods_per_year = options.periods_per_year.value_or(
        default_periods_per_year(spec.calendar, spec.frequency));
    if (!(spec.periods_per_year > 0.0)) {
        throw Error(Errc::config_error, "periods_per_year must be positive");
    }
    if (options.fee_rate < 0.0 || options.fee_rate >= 1.0) {
        throw Error(Errc::config_error, "fee_rate must be in [0, 1)");
    }
    spec.fee_rate = options.fee_rate;
    return spec;
}

bool is_trading_time(const MarketSpec& spec, Timestamp t) {
    return spec.calendar.is_trading_time(t);
}

std::optional<QuantityViolation> validate_quantity(const MarketSpec& spec, const Instrument& instrument,
                                                   double qty) {
    if (!(qty > 0.0) || !std::isfinite(qty)) {
        throw Error(Errc::non_positive_quantity, "quantity must be positive and finite");
    }
    if (instrument.kind == InstrumentKind::crypto_pair ||
        spec.quantity_granularity == Granularity::fractional) {
        return std::nullopt;
    }
    if (qty != std::floor(qty)) {
        return QuantityViolation{QuantityRule::integer_shares,
                                 instrument.symbol + " trades in whole shares"};
    }
    if (spec.lot_size && *spec.lot_size > 1 && std::fmod(qty, static_cast<double>(*spec.lot_size)) != 0.0) {
        return QuantityViolation{QuantityRule::lot_size,
                                 instrument.symbol + " trades in lots of " + std::to_string(*spec.lot_size) +
                                     " shares"};
    }
    return std::nullopt;
}

double periods_per_year(const MarketSpec& spec) noexcept {
    return spec.periods_per_year;
}

}  // namespace arena::market
