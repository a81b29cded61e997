// Acceptance suite. One PASS/FAIL line per criterion; exit status is the
// number of failures (capped), so ctest fails if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "arena/agent/runtime.hpp"
#include "arena/agent/scripted.hpp"
#include "arena/cli/cli.hpp"
#include "arena/metrics/metrics.hpp"
#include "arena/portfolio/portfolio.hpp"
#include "arena/toolserver/server.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace arena;
using nlohmann::json;
using arena::testing::TempDir;
using arena::testing::fixture_dir;
using arena::testing::read_file;
using arena::testing::write_file;

namespace {

// Tolerances, fixed here and nowhere else.
constexpr double kOracleTol = 1e-9;        // relative, metric oracle suite
constexpr double kOracleSeconds = 5.0;
constexpr double kSortinoPinTol = 1e-5;
constexpr double kMddPinTol = 1e-9;
constexpr double kVolPinTol = 1e-4;
constexpr double kCrPinTol = 1e-12;
constexpr double kConservationTol = 1e-9;  // relative to pre-trade valuation
constexpr double kBaselineTol = 1e-9;      // percentage points
constexpr double kStatsTol = 1e-12;
constexpr double kReplaySeconds = 10.0;
constexpr double kReportTol = 1e-9;

bool close_rel(double a, double b, double tol) { return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b)); }

struct Check {
    bool ok = true;
    std::string detail;
    void fail(const std::string& why) {
        if (ok) {
            detail = why;
        }
        ok = false;
    }
};

int failures = 0;

void report(const std::string& name, const std::function<Check()>& body) {
    Check c;
    try {
        c = body();
    } catch (const std::exception& e) {
        c.fail(std::string("exception: ") + e.what());
    }
    std::cout << (c.ok ? "PASS " : "FAIL ") << name;
    if (!c.detail.empty()) {
        std::cout << " (" << c.detail << ")";
    }
    std::cout << std::endl;
    failures += c.ok ? 0 : 1;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

metrics::ReturnSeries series(std::vector<double> r, double ppy = 252.0) { return {std::move(r), ppy}; }

// 1
Check metric_oracle_suite() {
    Check c;
    std::mt19937_64 rng(20251102);
    std::uniform_real_distribution<double> ret(-0.3, 0.3);
    std::uniform_int_distribution<int> len(2, 500);
    const auto t0 = std::chrono::steady_clock::now();
    int compared = 0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> r(static_cast<std::size_t>(len(rng)));
        for (auto& x : r) {
            do {
                x = ret(rng);
            } while (x == -0.3);
        }
        const double ppy = (i % 2 == 0) ? 252.0 : 365.0;
        auto s = series(r, ppy);
        auto check = [&](const char* what, double got, double want) {
            ++compared;
            if (!close_rel(got, want, kOracleTol)) {
                c.fail(std::string(what) + " series " + std::to_string(i) + ": " + fmt(got) + " vs " + fmt(want));
            }
        };
        check("cr", metrics::cumulative_return(s), oracle::cr(r));
        check("vol", metrics::volatility(s, true), oracle::vol(r, ppy, true));
        check("mdd", metrics::max_drawdown(s), oracle::mdd(r));
        auto got = metrics::sortino(s, 0.0, true);
        auto want = oracle::sortino(r, 0.0, ppy, true);
        if (got.has_value() != want.has_value()) {
            c.fail("sortino definedness differs on series " + std::to_string(i));
        } else if (got) {
            check("sortino", *got, *want);
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= kOracleSeconds) {
        c.fail("took " + fmt(secs) + " s");
    }
    if (c.ok) {
        c.detail = std::to_string(compared) + " comparisons in " + fmt(secs) + " s";
    }
    return c;
}

// 2
Check worked_pins() {
    Check c;
    const double cr = metrics::cumulative_return(series({0.10, -0.10}));
    if (std::fabs(cr - -1.00) > kCrPinTol) c.fail("CR " + fmt(cr));
    auto sr = metrics::sortino(series({0.01, -0.02, 0.03}), 0.0, false);
    if (!sr || std::fabs(*sr - 0.57735) > kSortinoPinTol) c.fail("Sortino " + (sr ? fmt(*sr) : "undefined"));
    const double mdd = metrics::max_drawdown(series({0.1, -0.2, 0.05}));
    if (std::fabs(mdd - -20.0) > kMddPinTol) c.fail("MDD " + fmt(mdd));
    const double vol = metrics::volatility(series({0.01, 0.03}, 252.0), true);
    if (std::fabs(vol - 22.4499) > kVolPinTol) c.fail("Vol " + fmt(vol));
    return c;
}

// 3
Check excess_pin() {
    Check c;
    const double got = metrics::excess_return(9.56, 1.87);
    if (got != 7.69) {
        c.fail("got " + fmt(got));
    }
    return c;
}

// 4
Check temporal_isolation() {
    Check c;
    struct Env {
        std::string name;
        market::MarketId id;
        std::string baseline;
        Timestamp start, end;
    };
    const std::vector<Env> envs{
        {"crypto30", market::MarketId::crypto, "BTCUSDT", arena::testing::ts("2025-11-02T00:00:00Z"),
         arena::testing::ts("2025-12-01T00:00:00Z")},
        {"us_hourly", market::MarketId::us, "QQQ", arena::testing::ts("2025-10-02T14:30:00Z"),
         arena::testing::ts("2025-10-07T20:30:00Z")},
    };
    const std::vector<std::string> words{"earnings", "guidance", "rotation", "outlook", "rates", "BTCUSDT",
                                         "AAPL", "growth", "margin", "zzz"};
    std::mt19937_64 rng(424242);
    auto pick = [&rng](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

    int queries = 0;
    int records = 0;
    int leaks = 0;
    for (int round = 0; queries < 10000; ++round) {
        const auto& env = envs[static_cast<std::size_t>(round) % envs.size()];
        market::MarketOptions o;
        o.baseline_symbol = env.baseline;
        o.calendar_file = fixture_dir(env.name) / "calendar.txt";
        auto spec = market::load_market_spec(env.id, fixture_dir(env.name) / "universe.txt", o);
        if (env.id == market::MarketId::crypto && market::periods_per_year(spec) != 365.0) {
            c.fail("crypto periods_per_year " + fmt(market::periods_per_year(spec)));
        }
        auto store = arena::testing::fixture_store(env.name);
        toolserver::ToolServer server(spec, store);
        const auto token = server.open_session({env.start, env.end, 100000.0, 1000000});
        auto symbols = spec.tradable_symbols();
        std::int64_t id = 0;
        auto send = [&](const std::string& method, json params) {
            json req = {{"id", ++id}, {"session", token}, {"method", method}, {"params", std::move(params)}};
            ++queries;
            return json::parse(server.handle_line(req.dump()));
        };
        auto obs = send("observe", json::object());
        Timestamp clock = arena::testing::ts(obs["result"]["clock"].get<std::string>());
        auto after_clock = [&](const json& ts_field) {
            ++records;
            if (arena::testing::ts(ts_field.get<std::string>()) > clock) {
                ++leaks;
                c.fail("record at " + ts_field.get<std::string>() + " served at clock " + format_timestamp(clock));
            }
        };
        bool done = false;
        while (!done && queries < 10000) {
            const auto kind = pick(10);
            json r;
            if (kind < 3) {
                json p = {{"symbol", symbols[pick(symbols.size())]}};
                if (rng() % 2) p["lookback"] = 1 + static_cast<int>(pick(40));
                r = send("check_price", p);
                if (r.contains("result")) {
                    after_clock(r["result"]["ts"]);
                    for (const auto& b : r["result"]["bars"]) after_clock(b["ts"]);
                }
            } else if (kind < 5) {
                json p = {{"query", words[pick(words.size())] + " " + words[pick(words.size())]}};
                if (rng() % 2) p["limit"] = 1 + static_cast<int>(pick(50));
                r = send("search", p);
                if (r.contains("result")) {
                    for (const auto& d : r["result"]["documents"]) after_clock(d["ts"]);
                }
            } else if (kind < 7) {
                json p = json::object();
                if (rng() % 2) p["symbol"] = symbols[pick(symbols.size())];
                if (rng() % 3 == 0) p["since"] = format_timestamp(clock - std::chrono::hours(24 * (1 + pick(10))));
                p["limit"] = 1 + static_cast<int>(pick(100));
                r = send("news", p);
                if (r.contains("result")) {
                    for (const auto& n : r["result"]["items"]) after_clock(n["published_at"]);
                }
            } else if (kind == 7) {
                r = send("trade", {{"action", rng() % 2 ? "buy" : "sell"},
                                   {"symbol", symbols[pick(symbols.size())]},
                                   {"qty", 1.0 + static_cast<double>(pick(5))}});
                if (r.contains("result")) after_clock(r["result"]["fill"]["ts"]);
            } else if (kind == 8) {
                r = send("observe", json::object());
            } else {
                r = send("stop", json::object());
                if (r.contains("result")) {
                    done = r["result"]["done"].get<bool>();
                    if (!done) clock = arena::testing::ts(r["result"]["next_clock"].get<std::string>());
                }
            }
            if (!r.contains("result") && !r.contains("error")) {
                c.fail("malformed response " + r.dump());
            }
        }
    }
    if (c.ok) {
        c.detail = std::to_string(queries) + " queries, " + std::to_string(records) + " records, 0 after clock";
    } else if (leaks > 0) {
        c.detail += "; " + std::to_string(leaks) + " leaks";
    }
    return c;
}

// 5
Check conservation() {
    Check c;
    TempDir dir;
    auto write_universe = [&](const std::string& name, const std::vector<std::string>& syms) {
        std::string text;
        for (const auto& s : syms) text += s + "\n";
        return write_file(dir / name, text);
    };
    market::MarketOptions us_opts;
    us_opts.baseline_symbol = "QQQ";
    const std::vector<std::string> us_syms{"AAPL", "MSFT", "NVDA", "QQQ"};
    auto us = market::load_market_spec(market::MarketId::us, write_universe("us.txt", us_syms), us_opts);
    market::MarketOptions cn_opts;
    cn_opts.baseline_symbol = "000016.SH";
    const std::vector<std::string> cn_syms{"600519.SH", "601318.SH", "000016.SH"};
    auto cn = market::load_market_spec(market::MarketId::ashare, write_universe("cn.txt", cn_syms), cn_opts);
    market::MarketOptions cr_opts;
    cr_opts.baseline_symbol = "BTCUSDT";
    const std::vector<std::string> cr_syms{"BTCUSDT", "ETHUSDT", "SOLUSDT"};
    auto crypto = market::load_market_spec(market::MarketId::crypto, write_universe("c.txt", cr_syms), cr_opts);

    struct M {
        const market::MarketSpec* spec;
        const std::vector<std::string>* syms;
        Timestamp open;
    };
    const std::vector<M> markets{{&us, &us_syms, arena::testing::ts("2025-10-01T14:30:00Z")},
                                 {&cn, &cn_syms, arena::testing::ts("2025-09-29T01:30:00Z")},
                                 {&crypto, &cr_syms, arena::testing::ts("2025-11-02T00:00:00Z")}};

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    long fills = 0, rejections = 0, odd_lots = 0, odd_lot_rejections = 0;
    for (int seq = 0; seq < 10000; ++seq) {
        const auto& m = markets[static_cast<std::size_t>(seq) % markets.size()];
        portfolio::PortfolioState state;
        state.cash = 1000.0 + unit(rng) * 1e6;
        portfolio::Prices px;
        for (const auto& s : *m.syms) px[s] = 0.5 + unit(rng) * 2000.0;
        const int steps = 1 + static_cast<int>(rng() % 40);
        for (int k = 0; k < steps; ++k) {
            const auto& sym = (*m.syms)[rng() % m.syms->size()];
            const double price = px[sym];
            double qty;
            switch (rng() % 5) {
                case 0: qty = std::floor(unit(rng) * 2000.0); break;              // whole, any
                case 1: qty = 100.0 * std::floor(unit(rng) * 30.0); break;         // round lots, may be 0
                case 2: qty = unit(rng) * 50.0; break;                             // fractional
                case 3: qty = -std::floor(unit(rng) * 10.0); break;                // non-positive
                default: {
                    auto it = state.holdings.find(sym);
                    qty = it == state.holdings.end() ? 100.0 : it->second * (0.5 + unit(rng));
                }
            }
            const portfolio::Order order{rng() % 2 ? portfolio::Side::buy : portfolio::Side::sell, sym, qty};
            const auto before = state;
            const double v_before = portfolio::valuation(state, px);
            const bool odd_cn = m.spec == &cn && qty > 0.0 && std::fmod(qty, 100.0) != 0.0;
            odd_lots += odd_cn;
            auto out = portfolio::execute(state, order, price, m.open, *m.spec);
            if (auto* rej = std::get_if<portfolio::Rejection>(&out)) {
                ++rejections;
                odd_lot_rejections += odd_cn;
                if (!(state == before)) c.fail("rejection mutated state");
                (void)rej;
                continue;
            }
            if (odd_cn) c.fail("A-share qty " + fmt(qty) + " accepted");
            auto& ex = std::get<portfolio::Execution>(out);
            ++fills;
            const double v_after = portfolio::valuation(ex.state, px);
            if (std::fabs(v_after - v_before) > kConservationTol * std::max(1.0, v_before)) {
                c.fail("valuation moved " + fmt(v_before) + " -> " + fmt(v_after));
            }
            if (ex.state.cash < 0.0) c.fail("negative cash");
            for (const auto& [s, q] : ex.state.holdings) {
                if (q < 0.0) c.fail("negative holding " + s);
            }
            if (!(state == before)) c.fail("execute mutated its input");
            state = ex.state;
        }
    }
    if (odd_lot_rejections != odd_lots) {
        c.fail(std::to_string(odd_lot_rejections) + "/" + std::to_string(odd_lots) + " odd-lot A-share orders rejected");
    }
    if (odd_lots == 0 || fills == 0 || rejections == 0) c.fail("generator did not cover all paths");
    if (c.ok) {
        c.detail = std::to_string(fills) + " fills, " + std::to_string(rejections) + " rejections, " +
                   std::to_string(odd_lots) + "/" + std::to_string(odd_lots) + " odd lots rejected";
    }
    return c;
}

int invoke(std::vector<std::string> args, std::string* out_text = nullptr) {
    args.insert(args.begin(), "arena");
    std::ostringstream out, err;
    int code = cli::run_cli(args, out, err);
    if (out_text) *out_text = out.str();
    return code;
}

// Close of `symbol` at each ts, parsed straight from the fixture CSV.
std::map<std::string, double> closes_from_csv(const std::string& fixture, const std::string& symbol) {
    std::map<std::string, double> closes;
    std::istringstream in(read_file(fixture_dir(fixture) / "bars.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() == 7 && f[0] == symbol) closes[f[1]] = std::stod(f[5]);
    }
    return closes;
}

// 6
Check buy_and_hold() {
    Check c;
    TempDir dir;
    if (int code = invoke({"run", "--config", (fixture_dir("crypto30") / "run.json").string(), "--policy", "buy_and_hold",
                           "--out", (dir / "bh").string()});
        code != 0) {
        c.fail("run exited " + std::to_string(code));
        return c;
    }
    auto logs = agent::read_session_logs(dir / "bh");
    const auto& recs = logs.result.records;
    const auto rep = metrics::report_from_json(json::parse(read_file(dir / "bh" / "report.json"))["metrics"]);
    const double T = static_cast<double>(recs.size());
    if (recs.size() != 30) c.fail(std::to_string(recs.size()) + " decisions, expected 30");

    auto closes = closes_from_csv("crypto30", "BTCUSDT");
    const double first = closes.at(format_timestamp(recs.front().clock));
    const double last = closes.at(format_timestamp(recs.back().clock));
    const double baseline_cr = 100.0 * (last / first - 1.0);
    if (std::fabs(rep.cr - baseline_cr) > kBaselineTol) {
        c.fail("CR " + fmt(rep.cr) + " vs baseline " + fmt(baseline_cr));
    }
    if (std::fabs(rep.no_exec - (T - 1.0) / T) > kStatsTol) c.fail("no_exec " + fmt(rep.no_exec));
    if (std::fabs(rep.avg_trades - 1.0 / T) > kStatsTol) c.fail("avg_trades " + fmt(rep.avg_trades));
    if (c.ok) c.detail = "CR " + fmt(rep.cr) + " baseline " + fmt(baseline_cr);
    return c;
}

// 7
Check replay() {
    Check c;
    TempDir dir;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> digests;
    for (const char* name : {"a", "b"}) {
        if (int code = invoke({"run", "--config", (fixture_dir("crypto30") / "run.json").string(), "--policy", "random",
                               "--seed", "42", "--out", (dir / name).string()});
            code != 0) {
            c.fail("run exited " + std::to_string(code));
            return c;
        }
        digests.push_back(agent::decision_log_digest(dir / name / "decisions.jsonl"));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (digests[0] != digests[1]) c.fail("digests differ");
    if (secs >= kReplaySeconds) c.fail("took " + fmt(secs) + " s");
    if (c.ok) c.detail = digests[0].substr(0, 16) + " in " + fmt(secs) + " s";
    return c;
}

// 8
Check report_integrity() {
    Check c;
    TempDir dir;
    std::vector<std::pair<std::string, std::vector<std::string>>> runs{
        {"crypto30", {}}, {"us_hourly", {}}, {"ashare", {}},
        {"crypto30", {"--policy", "random", "--seed", "42", "--run-id", "crypto30-random"}},
        {"us_hourly", {"--policy", "random", "--seed", "3", "--run-id", "us-random"}},
        {"ashare", {"--policy", "random", "--seed", "8", "--run-id", "ashare-random"}}};
    int n = 0;
    std::vector<std::filesystem::path> dirs;
    for (const auto& [fixture, extra] : runs) {
        auto out = dir / ("run" + std::to_string(n++));
        std::vector<std::string> args{"run", "--config", (fixture_dir(fixture) / "run.json").string(), "--out", out.string()};
        args.insert(args.end(), extra.begin(), extra.end());
        if (int code = invoke(args); code != 0) {
            c.fail(fixture + " run exited " + std::to_string(code));
            return c;
        }
        auto saved = metrics::report_from_json(json::parse(read_file(out / "report.json"))["metrics"]);
        auto again = cli::recompute_report(out);
        auto diff = metrics::diff_reports(saved, again, kReportTol);
        if (!diff.empty()) c.fail(fixture + " field " + diff.front() + " differs");
        if (int code = invoke({"report", out.string()}); code != 0) c.fail(fixture + " report exited " + std::to_string(code));
        dirs.push_back(out);
    }

    // Each tamper goes on a fresh copy of the random crypto run.
    auto tamper = [&](const std::string& what, const std::function<void(const std::filesystem::path&)>& edit) {
        auto copy = dir / ("tamper-" + what);
        std::filesystem::copy(dirs[3], copy, std::filesystem::copy_options::recursive);
        edit(copy);
        if (int code = invoke({"report", copy.string()}); code == 0) c.fail("tampered " + what + " accepted");
    };
    auto edit_text = [](const std::filesystem::path& file, const std::function<void(std::string&)>& fn) {
        auto text = read_file(file);
        fn(text);
        write_file(file, text);
    };
    tamper("equity", [&](const std::filesystem::path& d) {
        edit_text(d / "equity.csv", [](std::string& t) {
            auto pos = t.rfind(',');
            t.replace(pos + 1, std::string::npos, "1\n");
        });
    });
    tamper("fill_price", [&](const std::filesystem::path& d) {
        edit_text(d / "decisions.jsonl", [](std::string& t) {
            auto pos = t.find("\"price\":");
            t.insert(pos + 8, "1");
        });
    });
    tamper("dropped_record", [&](const std::filesystem::path& d) {
        edit_text(d / "decisions.jsonl", [](std::string& t) { t.erase(0, t.find('\n') + 1); });
    });
    tamper("config", [&](const std::filesystem::path& d) {
        auto j = json::parse(read_file(d / "config.json"));
        j["initial_cash"] = j["initial_cash"].get<double>() * 2.0;
        write_file(d / "config.json", j.dump(2));
    });
    tamper("cached_report", [&](const std::filesystem::path& d) {
        auto j = json::parse(read_file(d / "report.json"));
        j["metrics"]["mdd"] = j["metrics"]["mdd"].get<double>() - 0.5;
        write_file(d / "report.json", j.dump(2));
    });
    tamper("missing_equity", [&](const std::filesystem::path& d) { std::filesystem::remove(d / "equity.csv"); });
    if (c.ok) c.detail = std::to_string(dirs.size()) + " runs recomputed, 6 tampers caught";
    return c;
}

}  // namespace

int main() {
    report("metric oracle suite", metric_oracle_suite);
    report("worked-example pins", worked_pins);
    report("excess-return pin 9.56 - 1.87 = 7.69", excess_pin);
    report("temporal isolation fuzz", temporal_isolation);
    report("accounting conservation", conservation);
    report("buy-and-hold equivalence", buy_and_hold);
    report("replay determinism", replay);
    report("report integrity", report_integrity);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
