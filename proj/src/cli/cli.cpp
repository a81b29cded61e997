#include "arena/cli/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "arena/agent/runtime.hpp"
#include "arena/agent/scripted.hpp"
#include "arena/core/digest.hpp"
#include "arena/toolserver/server.hpp"

namespace arena::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Relative tolerance for cross-checks between independently logged numbers.
constexpr double kAuditTol = 1e-9;
// Field tolerance for report.json vs recomputed metrics.
constexpr double kReportTol = 1e-9;

const std::set<std::string> kConfigKeys = {
    "market",      "universe_file", "calendar_file", "store",          "bars_path",        "news_path",
    "docs_path",   "window",        "frequency",     "initial_cash",   "policy",           "tool_budget",
    "seed",        "baseline_symbol", "fee_rate",    "periods_per_year", "out",            "run_id",
    "config_digest", "lot_size",    "session",
};

[[noreturn]] void config_fail(const std::string& why) { throw Error(Errc::config_error, why); }

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path.lexically_normal() : (base / path).lexically_normal();
}

template <typename T>
T field(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        config_fail(std::string("config field '") + key + "' is missing or has the wrong type");
    }
}

Timestamp config_time(const json& j, const char* key) {
    auto ts = parse_timestamp(field<std::string>(j, key));
    if (!ts) {
        config_fail(std::string("window.") + key + " is not an RFC 3339 timestamp");
    }
    return *ts;
}

bool close_enough(double a, double b) { return std::fabs(a - b) <= kAuditTol * std::max(1.0, std::fabs(b)); }

[[noreturn]] void tampered(const fs::path& dir, const std::string& why) {
    throw Error(Errc::corrupt_log, dir.string() + ": " + why);
}

void init_logging(std::ostream& err) {
    static bool done = false;
    if (!done) {
        auto logger = spdlog::stderr_logger_mt("arena");
        logger->set_pattern("[%l] %v");
        spdlog::set_default_logger(logger);
        done = true;
    }
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("ARENA_LOG_LEVEL")) {
        const std::string v(lvl);
        if (v == "error" || v == "warn" || v == "info" || v == "debug") {
            spdlog::set_level(spdlog::level::from_str(v));
        } else {
            err << "warning: ignoring ARENA_LOG_LEVEL=" << v << " (expected error|warn|info|debug)\n";
        }
    }
}

json report_file(const std::string& run_id, const metrics::MetricReport& report) {
    return {{"run_id", run_id}, {"metrics", metrics::to_json(report)}};
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) {
        throw Error(Errc::io_error, "cannot write " + path.string());
    }
}

struct Overrides {
    std::string policy;
    std::string policy_params;
    std::optional<std::int64_t> seed;
    std::string store;
    std::string out;
    std::string start;
    std::string end;
    std::string run_id;
    std::optional<int> budget;
    std::optional<double> cash;
};

void apply(RunConfig& c, const Overrides& o) {
    if (!o.policy.empty()) {
        c.policy = o.policy;
        c.policy_params = json::object();
    }
    if (!o.policy_params.empty()) {
        c.policy_params = json::parse(o.policy_params, nullptr, false);
        if (c.policy_params.is_discarded() || !c.policy_params.is_object()) {
            config_fail("--policy-params must be a JSON object");
        }
    }
    if (o.seed) {
        c.seed = o.seed;
    }
    if (!o.store.empty()) {
        c.store = fs::absolute(o.store).lexically_normal();
        c.bars_path.reset();
        c.news_path.reset();
        c.docs_path.reset();
    }
    if (!o.out.empty()) {
        c.out = fs::absolute(o.out).lexically_normal();
    }
    if (!o.start.empty()) {
        c.start = parse_timestamp_or_throw(o.start);
    }
    if (!o.end.empty()) {
        c.end = parse_timestamp_or_throw(o.end);
    }
    if (!o.run_id.empty()) {
        c.run_id = o.run_id;
    }
    if (o.budget) {
        c.tool_budget = *o.budget;
    }
    if (o.cash) {
        c.initial_cash = *o.cash;
    }
    if (!(c.start < c.end)) {
        config_fail("window start must precede window end");
    }
    if (!(c.initial_cash > 0.0)) {
        config_fail("initial_cash must be positive");
    }
    if (c.tool_budget < 1) {
        config_fail("tool_budget must be at least 1");
    }
}

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--policy", o.policy, "Scripted policy kind (buy_and_hold, equal_weight, random, momentum)");
    cmd->add_option("--policy-params", o.policy_params, "Policy parameters as a JSON object");
    cmd->add_option("--seed", o.seed, "Seed passed to seeded policies");
    cmd->add_option("--store", o.store, "Store image directory (replaces bars/news/docs paths)");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--start", o.start, "Window start (RFC 3339)");
    cmd->add_option("--end", o.end, "Window end (RFC 3339)");
    cmd->add_option("--run-id", o.run_id, "Run label used in reports");
    cmd->add_option("--budget", o.budget, "Tool budget per decision");
    cmd->add_option("--cash", o.cash, "Initial cash");
}

toolserver::SessionConfig session_config(const RunConfig& c) {
    return {c.start, c.end, c.initial_cash, c.tool_budget};
}

json policy_params_with_seed(const RunConfig& c) {
    json params = c.policy_params;
    if (c.seed && !params.contains("seed") && c.policy == "random") {
        params["seed"] = *c.seed;
    }
    return params;
}

/// Writes logs + report.json for a finished session. Returns the report if
/// the session produced any decisions.
std::optional<metrics::MetricReport> finish_run(const fs::path& dir, const RunConfig& c, const market::MarketSpec& spec,
                                                const data::DataStore& store, agent::SessionResult& result,
                                                json config) {
    config["config_digest"] = config_digest(config);
    result.config_digest = config["config_digest"];
    agent::write_session_logs(dir, result, config);
    if (result.records.empty()) {
        spdlog::warn("session wrote no decisions; skipping report for {}", dir.string());
        return std::nullopt;
    }
    auto baseline = baseline_curve(store, spec.baseline_symbol, result.records);
    auto report = metrics::compute_report(result, spec.periods_per_year, baseline);
    write_json(dir / "report.json", report_file(c.run_id, report));
    return report;
}

int cmd_ingest(const std::string& bars, const std::string& news, const std::string& docs, const std::string& out_dir,
               std::ostream& out) {
    data::DataStore store;
    if (!bars.empty()) {
        store.ingest_bars(fs::path(bars));
    }
    if (!news.empty()) {
        store.ingest_news(fs::path(news));
    }
    if (!docs.empty()) {
        store.ingest_documents(fs::path(docs));
    }
    store.freeze();
    store.save_image(out_dir);
    auto n = store.counts();
    out << "bars " << n.bars << "\nsymbols " << n.symbols << "\nnews " << n.news << "\ndocuments " << n.documents
        << "\nstore " << out_dir << '\n';
    return exit_ok;
}

int cmd_run(const std::string& config_path, const Overrides& o, std::ostream& out) {
    RunConfig c = load_run_config(config_path);
    apply(c, o);
    if (c.policy == "remote") {
        config_fail("policy 'remote' needs `arena serve`");
    }
    auto spec = build_market(c);
    auto store = build_store(c);
    auto policy = agent::make_scripted_policy(c.policy, policy_params_with_seed(c), spec);
    spdlog::info("run {}: {} {} decisions from {}", c.run_id, market::to_string(spec.market_id),
                 market::to_string(spec.frequency), format_timestamp(c.start));
    auto result = agent::run_session(spec, store, session_config(c), *policy);
    auto report = finish_run(c.out, c, spec, store, result, effective_config(c, spec));
    out << metrics::render_table({{c.run_id, *report}});
    out << "logs " << c.out.string() << '\n';
    return exit_ok;
}

std::atomic<toolserver::TcpServer*> g_tcp{nullptr};

extern "C" void on_signal(int) {
    if (auto* s = g_tcp.load()) {
        s->stop();
    }
}

int cmd_serve(const std::string& config_path, const Overrides& o, bool use_stdio, int port, std::size_t max_sessions,
              std::ostream& out) {
    RunConfig c = load_run_config(config_path);
    apply(c, o);
    auto spec = build_market(c);
    auto store = build_store(c);
    toolserver::ToolServer server(spec, store);
    const json base_config = effective_config(c, spec);

    std::mutex write_mutex;
    auto on_end = [&](const std::string& token, const agent::SessionResult& r) {
        std::lock_guard lock(write_mutex);
        agent::SessionResult result = r;
        json config = base_config;
        config["policy"] = {{"kind", "remote"}, {"params", json::object()}};
        config["session"] = token;
        RunConfig rc = c;
        rc.run_id = c.run_id + "-" + token;
        config["run_id"] = rc.run_id;
        const fs::path dir = c.out / token;
        try {
            finish_run(dir, rc, spec, store, result, config);
            spdlog::info("session {} ended: {} decision(s), logs in {}", token, result.records.size(), dir.string());
        } catch (const std::exception& e) {
            spdlog::error("session {}: cannot write logs: {}", token, e.what());
        }
    };

    if (use_stdio) {
        toolserver::serve_stream(server, session_config(c), std::cin, out, on_end);
        return exit_ok;
    }
    if (port < 0 || port > 65535) {
        config_fail("--port must be in [0, 65535]");
    }
    toolserver::TcpServer tcp(server, session_config(c), static_cast<std::uint16_t>(port));
    out << "listening on 127.0.0.1:" << tcp.port() << std::endl;
    g_tcp = &tcp;
    auto old_int = std::signal(SIGINT, on_signal);
    auto old_term = std::signal(SIGTERM, on_signal);
    tcp.run(on_end, max_sessions);
    g_tcp = nullptr;
    std::signal(SIGINT, old_int);
    std::signal(SIGTERM, old_term);
    return exit_ok;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& store, bool as_json, std::ostream& out) {
    std::vector<std::pair<std::string, metrics::MetricReport>> rows;
    json all = json::array();
    std::set<std::string> labels;
    for (const auto& d : dirs) {
        const fs::path dir(d);
        auto report = recompute_report(dir, store.empty() ? std::nullopt : std::optional<fs::path>(fs::path(store)));
        std::string label = dir.filename().string();
        if (auto cfg = json::parse(std::ifstream(dir / "config.json"), nullptr, false); cfg.is_object()) {
            label = cfg.value("run_id", label);
        }
        if (!labels.insert(label).second) {
            label = d;
        }
        if (fs::exists(dir / "report.json")) {
            auto saved = json::parse(std::ifstream(dir / "report.json"), nullptr, false);
            if (saved.is_discarded() || !saved.contains("metrics")) {
                tampered(dir, "report.json is not a report");
            }
            auto diff = metrics::diff_reports(metrics::report_from_json(saved["metrics"]), report, kReportTol);
            if (!diff.empty()) {
                std::string fields;
                for (const auto& f : diff) {
                    fields += (fields.empty() ? "" : ", ") + f;
                }
                tampered(dir, "report.json disagrees with the logs on: " + fields);
            }
        }
        all.push_back(report_file(label, report));
        rows.emplace_back(label, report);
    }
    if (as_json) {
        out << all.dump(2) << '\n';
    } else {
        out << metrics::render_table(rows);
    }
    return exit_ok;
}

}  // namespace

int exit_code_for(Errc code, std::string_view command) {
    switch (code) {
        case Errc::io_error: return exit_missing_file;
        case Errc::malformed_row:
        case Errc::duplicate_bar:
        case Errc::ohlc_violation:
        case Errc::malformed_universe_file:
        case Errc::malformed_calendar_file: return exit_malformed_data;
        case Errc::port_in_use: return exit_port_in_use;
        default: break;
    }
    if (command == "report") {
        return exit_corrupt_log;
    }
    switch (code) {
        case Errc::config_error:
        case Errc::unknown_market:
        case Errc::invalid_params:
        case Errc::unknown_symbol:
        case Errc::parse_error: return exit_config;
        case Errc::data_gap: return exit_data_gap;
        case Errc::corrupt_log: return exit_corrupt_log;
        default: return exit_other;
    }
}

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) {
        config_fail("config must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (kConfigKeys.count(key) == 0) {
            config_fail("unknown config field '" + key + "'");
        }
    }
    RunConfig c;
    c.market = market::parse_market_id(field<std::string>(j, "market"));
    c.universe_file = resolve(base_dir, field<std::string>(j, "universe_file"));
    auto path_opt = [&](const char* key) -> std::optional<fs::path> {
        if (!j.contains(key) || j[key].is_null()) {
            return std::nullopt;
        }
        return resolve(base_dir, field<std::string>(j, key));
    };
    c.calendar_file = path_opt("calendar_file");
    c.store = path_opt("store");
    c.bars_path = path_opt("bars_path");
    c.news_path = path_opt("news_path");
    c.docs_path = path_opt("docs_path");
    if (!c.store && !c.bars_path) {
        config_fail("config needs 'store' or 'bars_path'");
    }
    const json window = field<json>(j, "window");
    c.start = config_time(window, "start");
    c.end = config_time(window, "end");
    if (j.contains("frequency")) {
        c.frequency = market::parse_frequency(field<std::string>(j, "frequency"));
    }
    if (j.contains("initial_cash")) {
        c.initial_cash = field<double>(j, "initial_cash");
    }
    if (j.contains("policy")) {
        const auto& p = j["policy"];
        if (p.is_string()) {
            c.policy = p.get<std::string>();
        } else if (p.is_object()) {
            c.policy = field<std::string>(p, "kind");
            c.policy_params = p.value("params", json::object());
        } else {
            config_fail("'policy' must be a string or {kind, params}");
        }
    }
    if (j.contains("tool_budget")) {
        c.tool_budget = field<int>(j, "tool_budget");
    }
    if (j.contains("seed") && !j["seed"].is_null()) {
        c.seed = field<std::int64_t>(j, "seed");
    }
    if (j.contains("baseline_symbol") && !j["baseline_symbol"].is_null()) {
        c.baseline_symbol = field<std::string>(j, "baseline_symbol");
    }
    if (j.contains("fee_rate")) {
        c.fee_rate = field<double>(j, "fee_rate");
        if (!(c.fee_rate >= 0.0 && c.fee_rate < 1.0)) {
            config_fail("fee_rate must be in [0, 1)");
        }
    }
    if (j.contains("periods_per_year") && !j["periods_per_year"].is_null()) {
        c.periods_per_year = field<double>(j, "periods_per_year");
        if (!(*c.periods_per_year > 0.0)) {
            config_fail("periods_per_year must be positive");
        }
    }
    if (j.contains("run_id")) {
        c.run_id = field<std::string>(j, "run_id");
    }
    // Default output lands under the working directory, not next to the config.
    c.out = j.contains("out") ? resolve(base_dir, field<std::string>(j, "out"))
                              : fs::absolute(fs::path("runs") / c.run_id).lexically_normal();
    if (!(c.start < c.end)) {
        config_fail("window start must precede window end");
    }
    if (!(c.initial_cash > 0.0)) {
        config_fail("initial_cash must be positive");
    }
    if (c.tool_budget < 1) {
        config_fail("tool_budget must be at least 1");
    }
    return c;
}

RunConfig load_run_config(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw Error(Errc::io_error, "no such file: " + file.string());
    }
    auto j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        config_fail(file.string() + " is not valid JSON");
    }
    return parse_run_config(j, fs::absolute(file).parent_path());
}

json effective_config(const RunConfig& c, const market::MarketSpec& spec) {
    auto opt_path = [](const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); };
    return {
        {"market", market::to_string(c.market)},
        {"universe_file", c.universe_file.string()},
        {"calendar_file", opt_path(c.calendar_file)},
        {"store", opt_path(c.store)},
        {"bars_path", opt_path(c.bars_path)},
        {"news_path", opt_path(c.news_path)},
        {"docs_path", opt_path(c.docs_path)},
        {"window", {{"start", format_timestamp(c.start)}, {"end", format_timestamp(c.end)}}},
        {"frequency", market::to_string(spec.frequency)},
        {"initial_cash", c.initial_cash},
        {"policy", {{"kind", c.policy}, {"params", policy_params_with_seed(c)}}},
        {"tool_budget", c.tool_budget},
        {"seed", c.seed ? json(*c.seed) : json(nullptr)},
        {"baseline_symbol", spec.baseline_symbol},
        {"fee_rate", spec.fee_rate},
        {"periods_per_year", spec.periods_per_year},
        {"out", c.out.string()},
        {"run_id", c.run_id},
    };
}

std::string config_digest(json config) {
    if (config.is_object()) {
        config.erase("config_digest");
    }
    return sha256_hex(config.dump());
}

market::MarketSpec build_market(const RunConfig& c) {
    market::MarketOptions o;
    o.frequency = c.frequency;
    o.calendar_file = c.calendar_file;
    o.baseline_symbol = c.baseline_symbol;
    o.periods_per_year = c.periods_per_year;
    o.fee_rate = c.fee_rate;
    return market::load_market_spec(c.market, c.universe_file, o);
}

data::DataStore build_store(const RunConfig& c) {
    if (c.store) {
        return data::DataStore::load_image(*c.store);
    }
    data::DataStore store;
    store.ingest_bars(*c.bars_path);
    if (c.news_path) {
        store.ingest_news(*c.news_path);
    }
    if (c.docs_path) {
        store.ingest_documents(*c.docs_path);
    }
    store.freeze();
    return store;
}

std::vector<agent::EquityPoint> baseline_curve(const data::DataStore& store, const std::string& symbol,
                                               std::span<const agent::DecisionRecord> records) {
    std::vector<agent::EquityPoint> curve;
    curve.reserve(records.size());
    for (const auto& r : records) {
        const auto& bar = store.price_at(symbol, r.clock);
        if (bar.ts != r.clock) {
            throw Error(Errc::data_gap, "no " + symbol + " bar at " + format_timestamp(r.clock));
        }
        curve.push_back({r.mark_ts, bar.close});
    }
    return curve;
}

void verify_logs(const agent::SessionLogs& logs, const market::MarketSpec& spec, const data::DataStore& store) {
    const fs::path dir = logs.config.value("out", std::string("log"));
    const auto& records = logs.result.records;
    const auto& curve = logs.result.equity_curve;

    const auto stored = logs.config.value("config_digest", std::string());
    if (stored.empty() || stored != config_digest(logs.config)) {
        tampered(dir, "config.json digest mismatch");
    }
    if (records.empty()) {
        tampered(dir, "no decision records");
    }
    if (curve.size() != records.size()) {
        tampered(dir, "equity.csv has " + std::to_string(curve.size()) + " points for " +
                          std::to_string(records.size()) + " decisions");
    }

    portfolio::PortfolioState state;
    state.cash = logs.config.at("initial_cash").get<double>();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const std::string where = "decision " + std::to_string(i);
        if (r.index < 0 || (i > 0 && r.index <= records[i - 1].index)) {
            tampered(dir, where + ": index out of order");
        }
        if (i > 0 && r.clock <= records[i - 1].clock) {
            tampered(dir, where + ": clock does not increase");
        }
        if (r.mark_ts != spec.calendar.period_end(spec.frequency, r.clock)) {
            tampered(dir, where + ": mark time is not the period close");
        }
        for (const auto& f : r.fills) {
            const auto& bar = store.price_at(f.order.symbol, r.clock);
            if (f.ts != r.clock || bar.ts != r.clock || f.price != bar.open) {
                tampered(dir, where + ": fill of " + f.order.symbol + " not at the decision bar open");
            }
            if (!close_enough(state.cash + f.cash_delta, f.resulting_cash)) {
                tampered(dir, where + ": fill cash does not chain");
            }
            const double sign = f.order.action == portfolio::Side::buy ? 1.0 : -1.0;
            const double expected_delta = -sign * f.order.qty * f.price - f.fee;
            if (!close_enough(f.cash_delta, expected_delta)) {
                tampered(dir, where + ": fill cash delta inconsistent with qty and price");
            }
            state.cash = f.resulting_cash;
            state.holdings[f.order.symbol] += sign * f.order.qty;
            if (std::fabs(state.holdings[f.order.symbol]) <= kAuditTol) {
                state.holdings.erase(f.order.symbol);
            }
        }
        const auto& end = r.end_positions;
        bool same = close_enough(end.cash, state.cash) && end.holdings.size() == state.holdings.size();
        for (const auto& [sym, qty] : end.holdings) {
            auto it = state.holdings.find(sym);
            same = same && it != state.holdings.end() && close_enough(qty, it->second);
        }
        if (!same) {
            tampered(dir, where + ": end positions do not follow from fills");
        }
        state = end;

        portfolio::Prices closes;
        for (const auto& [sym, qty] : end.holdings) {
            closes[sym] = store.price_at(sym, r.clock).close;
        }
        const double value = portfolio::valuation(end, closes);
        if (!close_enough(r.end_valuation, value)) {
            tampered(dir, where + ": end valuation does not match positions at closes");
        }
        if (curve[i].ts != r.mark_ts || !close_enough(curve[i].valuation, value)) {
            tampered(dir, "equity.csv row " + std::to_string(i + 1) + " does not match decision log");
        }
    }
}

metrics::MetricReport recompute_report(const fs::path& run_dir, const std::optional<fs::path>& store_override) {
    auto logs = agent::read_session_logs(run_dir);
    RunConfig c = parse_run_config(logs.config, run_dir);
    if (store_override) {
        c.store = fs::absolute(*store_override);
        c.bars_path.reset();
        c.news_path.reset();
        c.docs_path.reset();
    }
    auto spec = build_market(c);
    auto store = build_store(c);
    try {
        verify_logs(logs, spec, store);
    } catch (const Error& e) {
        if (e.code() == Errc::corrupt_log) {
            throw;
        }
        tampered(run_dir, e.what());
    }
    auto baseline = baseline_curve(store, spec.baseline_symbol, logs.result.records);
    return metrics::compute_report(logs.result, spec.periods_per_year, baseline);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    init_logging(err);
    CLI::App app{"arena: trading-agent evaluation harness", "arena"};
    app.require_subcommand(1);

    auto* ingest = app.add_subcommand("ingest", "Build a frozen store image from raw files");
    std::string bars, news, docs, store_out;
    ingest->add_option("--bars", bars, "Bars CSV")->required();
    ingest->add_option("--news", news, "News JSONL");
    ingest->add_option("--docs", docs, "Search documents JSONL");
    ingest->add_option("--out", store_out, "Store image directory")->required();

    Overrides run_o;
    std::string run_config;
    auto* run = app.add_subcommand("run", "Run one session with a scripted policy");
    run->add_option("--config", run_config, "Run config JSON")->required();
    add_overrides(run, run_o);

    Overrides serve_o;
    std::string serve_config;
    int port = 7070;
    bool use_stdio = false;
    std::size_t max_sessions = 0;
    auto* serve = app.add_subcommand("serve", "Serve the tool protocol to remote agents");
    serve->add_option("--config", serve_config, "Run config JSON")->required();
    serve->add_option("--port", port, "TCP port on 127.0.0.1 (0 picks a free port)");
    serve->add_flag("--stdio", use_stdio, "Serve one session over stdin/stdout");
    serve->add_option("--max-sessions", max_sessions, "Exit after this many sessions (0 = run until signalled)");
    add_overrides(serve, serve_o);

    std::vector<std::string> dirs;
    std::string report_store;
    bool as_json = false;
    auto* report = app.add_subcommand("report", "Recompute metrics from log directories");
    report->add_option("dirs", dirs, "Run log directories")->required();
    report->add_option("--store", report_store, "Store image to use instead of the one in config.json");
    report->add_flag("--json", as_json, "Print JSON instead of a table");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) {
        reversed.pop_back();  // argv[0]
    }
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    std::string command = app.get_subcommands().front()->get_name();
    try {
        if (command == "ingest") {
            return cmd_ingest(bars, news, docs, store_out, out);
        }
        if (command == "run") {
            return cmd_run(run_config, run_o, out);
        }
        if (command == "serve") {
            return cmd_serve(serve_config, serve_o, use_stdio, port, max_sessions, out);
        }
        return cmd_report(dirs, report_store, as_json, out);
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
        return exit_code_for(e.code(), command);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return command == "report" ? exit_corrupt_log : exit_other;
    }
}

}  // namespace arena::cli
