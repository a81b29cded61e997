#include "arena/agent/runtime.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "arena/core/digest.hpp"
#include "arena/core/error.hpp"

namespace arena::agent {

namespace {

portfolio::Prices prices_from_json(const nlohmann::json& j) {
    portfolio::Prices out;
    for (const auto& [symbol, price] : j.items()) {
        out[symbol] = price.get<double>();
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void corrupt(const std::filesystem::path& file, const std::string& why) {
    throw Error(Errc::corrupt_log, file.string() + ": " + why);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        corrupt(path, "missing");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

Observation observation_from_json(const nlohmann::json& j) {
    Observation obs;
    obs.clock = parse_timestamp_or_throw(j.at("clock").get<std::string>());
    obs.decision_index = j.at("decision_index").get<int>();
    obs.positions = portfolio::from_snapshot(j.at("positions"));
    obs.prev_close = prices_from_json(j.at("previous_close_prices"));
    obs.buy_price = prices_from_json(j.at("current_buy_prices"));
    obs.gaps = j.value("gaps", std::vector<std::string>{});
    obs.budget = j.value("budget", 0);
    return obs;
}

Observation build_observation(const toolserver::Session& session) {
    return observation_from_json(session.observe());
}

SessionDriver::SessionDriver(toolserver::ToolServer& server, std::string token)
    : server_(server), token_(std::move(token)) {}

nlohmann::json SessionDriver::call(const std::string& method, const nlohmann::json& params,
                                   const std::string& reasoning) {
    toolserver::ToolRequest req;
    req.id = next_id_++;
    req.session = token_;
    req.method = method;
    req.params = params;
    if (!reasoning.empty()) {
        req.reasoning = reasoning;
    }
    last_request_ = req.to_json();
    return nlohmann::json::parse(server_.handle_line(last_request_.dump()));
}

bool SessionDriver::finished() {
    bool done = false;
    server_.with_session(token_, [&](toolserver::Session& s) { done = s.finished(); });
    return done;
}

DecisionRecord run_decision_point(SessionDriver& driver, Policy& policy) {
    auto observed = driver.call("observe", nlohmann::json::object());
    if (toolserver::is_error(observed)) {
        throw Error(Errc::config_error, "observe failed: " + observed["error"].value("message", ""));
    }
    Observation obs = observation_from_json(observed["result"]);
    const int cap = obs.budget;

    std::vector<TraceEntry> transcript;
    std::optional<std::string> fault;
    std::string closing_reasoning;
    int calls = 0;
    while (true) {
        PolicyStep step;
        try {
            step = policy.next(obs, transcript);
        } catch (const std::exception& e) {
            fault = std::string("policy raised: ") + e.what();
            break;
        }
        if (!step.call || step.call->method == "stop") {
            closing_reasoning = std::move(step.reasoning);
            break;
        }
        const auto& call = *step.call;
        if (!toolserver::is_known_method(call.method) || !call.params.is_object()) {
            fault = "policy emitted a malformed step (method '" + call.method + "')";
            break;
        }
        auto response = driver.call(call.method, call.params, step.reasoning);
        transcript.push_back({driver.last_request(), response});
        if (!toolserver::is_error(response)) {
            obs.gathered.push_back(response["result"]);
        }
        ++calls;
        if (toolserver::error_code(response) == toolserver::codes::budget_exhausted || calls > cap) {
            break;
        }
    }

    nlohmann::json stop_params = nlohmann::json::object();
    if (fault) {
        stop_params["fault"] = *fault;
    }
    auto stopped = driver.call("stop", stop_params, closing_reasoning);
    if (toolserver::is_error(stopped)) {
        throw Error(Errc::config_error, "stop failed: " + stopped["error"].value("message", ""));
    }
    DecisionRecord record;
    driver.server().with_session(driver.token(),
                                 [&](toolserver::Session& s) { record = s.records().back(); });
    return record;
}

SessionResult run_session(const market::MarketSpec& spec, const data::DataStore& store,
                          const toolserver::SessionConfig& config, Policy& policy) {
    toolserver::ToolServer server(spec, store);
    SessionDriver driver(server, server.open_session(config));
    while (!driver.finished()) {
        run_decision_point(driver, policy);
    }
    return server.close_session(driver.token());
}

void write_session_logs(const std::filesystem::path& dir, const SessionResult& result, const nlohmann::json& config) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "decisions.jsonl", std::ios::binary | std::ios::trunc);
        for (const auto& r : result.records) {
            out << to_json(r).dump() << '\n';
        }
        if (!out) {
            throw Error(Errc::io_error, "cannot write " + (dir / "decisions.jsonl").string());
        }
    }
    {
        std::ofstream out(dir / "equity.csv", std::ios::binary | std::ios::trunc);
        out << "ts,valuation\n";
        for (const auto& p : result.equity_curve) {
            out << format_timestamp(p.ts) << ',' << fmt_double(p.valuation) << '\n';
        }
        if (!out) {
            throw Error(Errc::io_error, "cannot write " + (dir / "equity.csv").string());
        }
    }
    {
        std::ofstream out(dir / "config.json", std::ios::binary | std::ios::trunc);
        out << config.dump(2) << '\n';
        if (!out) {
            throw Error(Errc::io_error, "cannot write " + (dir / "config.json").string());
        }
    }
}

SessionLogs read_session_logs(const std::filesystem::path& dir) {
    SessionLogs logs;
    auto config_path = dir / "config.json";
    logs.config = nlohmann::json::parse(read_file(config_path), nullptr, false);
    if (logs.config.is_discarded() || !logs.config.is_object()) {
        corrupt(config_path, "not a JSON object");
    }
    logs.result.config_digest = logs.config.value("config_digest", "");

    auto decisions_path = dir / "decisions.jsonl";
    std::istringstream decisions(read_file(decisions_path));
    std::string line;
    int lineno = 0;
    while (std::getline(decisions, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            corrupt(decisions_path, "line " + std::to_string(lineno) + " is not JSON");
        }
        logs.result.records.push_back(record_from_json(j));
    }

    auto equity_path = dir / "equity.csv";
    std::istringstream equity(read_file(equity_path));
    if (!std::getline(equity, line) || line != "ts,valuation") {
        corrupt(equity_path, "bad header");
    }
    lineno = 1;
    while (std::getline(equity, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        auto comma = line.find(',');
        auto ts = parse_timestamp(line.substr(0, comma));
        if (comma == std::string::npos || !ts) {
            corrupt(equity_path, "line " + std::to_string(lineno) + " is malformed");
        }
        try {
            std::size_t used = 0;
            std::string num = line.substr(comma + 1);
            double v = std::stod(num, &used);
            if (used != num.size()) {
                throw std::invalid_argument("trailing");
            }
            logs.result.equity_curve.push_back({*ts, v});
        } catch (const std::exception&) {
            corrupt(equity_path, "line " + std::to_string(lineno) + " has a bad valuation");
        }
    }
    return logs;
}

std::string decision_log_digest(const std::filesystem::path& decisions_jsonl) {
    std::istringstream in(read_file(decisions_jsonl));
    std::string canonical;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            corrupt(decisions_jsonl, "not JSON");
        }
        j.erase(kWallTimeField);
        canonical += j.dump();
        canonical += '\n';
    }
    return sha256_hex(canonical);
}

}  // namespace arena::agent
