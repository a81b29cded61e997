#include <gtest/gtest.h>

#include "arena/core/error.hpp"
#include "arena/market/market_spec.hpp"
#include "helpers.hpp"

using namespace arena;
using namespace arena::market;
using arena::testing::TempDir;
using arena::testing::make_spec;
using arena::testing::write_file;

namespace {

Errc load_error(const std::string& universe, MarketId id = MarketId::us) {
    TempDir dir;
    try {
        load_market_spec(id, write_file(dir / "u.txt", universe));
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::io_error;
}

}  // namespace

TEST(MarketSpec, PerMarketDefaults) {
    TempDir dir;
    auto us = make_spec(dir, MarketId::us, {"AAPL", "QQQ"});
    EXPECT_EQ(us.lot_size, 1);
    EXPECT_EQ(us.frequency, Frequency::hourly);
    EXPECT_EQ(us.baseline_symbol, "QQQ");
    EXPECT_DOUBLE_EQ(us.periods_per_year, 1638.0);
    EXPECT_EQ(us.universe.back().symbol, "CASH");

    auto a = make_spec(dir, MarketId::ashare, {"600519.SH", "000016.SH"});
    EXPECT_EQ(a.lot_size, 100);
    EXPECT_EQ(a.frequency, Frequency::daily);
    EXPECT_EQ(a.baseline_symbol, "000016.SH");
    EXPECT_DOUBLE_EQ(a.periods_per_year, 252.0);

    auto c = make_spec(dir, MarketId::crypto, {"BTCUSDT", "ETHUSDT"});
    EXPECT_EQ(c.quantity_granularity, Granularity::fractional);
    EXPECT_EQ(c.frequency, Frequency::daily);
    EXPECT_EQ(c.baseline_symbol, "CD5");
    EXPECT_DOUBLE_EQ(c.periods_per_year, 365.0);
    EXPECT_EQ(c.find("BTCUSDT")->display_name, "BTC/USDT");
}

TEST(MarketSpec, AnnualizationByFrequency) {
    EXPECT_DOUBLE_EQ(default_periods_per_year(default_calendar(MarketId::us), Frequency::hourly), 1638.0);
    EXPECT_DOUBLE_EQ(default_periods_per_year(default_calendar(MarketId::us), Frequency::daily), 252.0);
    EXPECT_DOUBLE_EQ(default_periods_per_year(default_calendar(MarketId::ashare), Frequency::hourly), 1008.0);
    EXPECT_DOUBLE_EQ(default_periods_per_year(default_calendar(MarketId::crypto), Frequency::daily), 365.0);
    EXPECT_DOUBLE_EQ(default_periods_per_year(default_calendar(MarketId::crypto), Frequency::hourly), 8760.0);
}

TEST(MarketSpec, Overrides) {
    TempDir dir;
    MarketOptions o;
    o.frequency = Frequency::daily;
    o.baseline_symbol = "AAPL";
    o.periods_per_year = 250.0;
    o.fee_rate = 0.001;
    auto us = make_spec(dir, MarketId::us, {"AAPL"}, o);
    EXPECT_EQ(us.frequency, Frequency::daily);
    EXPECT_EQ(us.baseline_symbol, "AAPL");
    EXPECT_DOUBLE_EQ(us.periods_per_year, 250.0);
    EXPECT_DOUBLE_EQ(us.fee_rate, 0.001);
}

TEST(MarketSpec, MalformedUniverse) {
    EXPECT_EQ(load_error(""), Errc::malformed_universe_file);
    EXPECT_EQ(load_error("# only comments\n"), Errc::malformed_universe_file);
    EXPECT_EQ(load_error("AAPL\nAAPL\n"), Errc::malformed_universe_file);
    EXPECT_EQ(load_error("AAPL\nCASH\n"), Errc::malformed_universe_file);
    EXPECT_EQ(load_error("AAPL MSFT\n"), Errc::malformed_universe_file);
    TempDir dir;
    try {
        load_market_spec(MarketId::us, dir / "missing.txt");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::io_error);
    }
    try {
        parse_market_id("forex");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::unknown_market);
    }
}

TEST(MarketSpec, QuantityRules) {
    TempDir dir;
    auto a = make_spec(dir, MarketId::ashare, {"600519.SH", "000016.SH"});
    const auto& moutai = *a.find("600519.SH");
    EXPECT_FALSE(validate_quantity(a, moutai, 100));
    EXPECT_FALSE(validate_quantity(a, moutai, 300));
    auto v = validate_quantity(a, moutai, 150);
    ASSERT_TRUE(v);
    EXPECT_EQ(v->rule, QuantityRule::lot_size);

    auto us = make_spec(dir, MarketId::us, {"AAPL", "QQQ"});
    auto frac = validate_quantity(us, *us.find("AAPL"), 1.5);
    ASSERT_TRUE(frac);
    EXPECT_EQ(frac->rule, QuantityRule::integer_shares);

    auto c = make_spec(dir, MarketId::crypto, {"BTCUSDT"});
    EXPECT_FALSE(validate_quantity(c, *c.find("BTCUSDT"), 0.00012345));

    try {
        validate_quantity(us, *us.find("AAPL"), 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::non_positive_quantity);
    }
}

TEST(MarketSpec, TradingTime) {
    TempDir dir;
    auto us = make_spec(dir, MarketId::us, {"AAPL", "QQQ"});
    EXPECT_TRUE(is_trading_time(us, arena::testing::ts("2025-10-01T14:30:00Z")));
    EXPECT_FALSE(is_trading_time(us, arena::testing::ts("2025-10-01T14:29:59Z")));
    auto c = make_spec(dir, MarketId::crypto, {"BTCUSDT"});
    EXPECT_TRUE(is_trading_time(c, arena::testing::ts("2025-10-04T03:00:00Z")));
}
