#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "arena/agent/runtime.hpp"
#include "arena/core/error.hpp"
#include "arena/data/datastore.hpp"
#include "arena/market/market_spec.hpp"
#include "arena/metrics/metrics.hpp"
#include "arena/toolserver/session.hpp"

namespace arena::cli {

/// Process exit statuses. Stable; documented in the README.
enum ExitCode : int {
    exit_ok = 0,
    exit_other = 1,
    exit_missing_file = 2,
    exit_malformed_data = 3,
    exit_config = 4,
    exit_data_gap = 5,
    exit_port_in_use = 6,
    exit_corrupt_log = 7,
    exit_usage = 64,
};

/// Exit status for an error raised while running `command`.
int exit_code_for(Errc code, std::string_view command);

/// Everything a run needs. Paths are absolute once loaded.
struct RunConfig {
    market::MarketId market = market::MarketId::us;
    std::filesystem::path universe_file;
    std::optional<std::filesystem::path> calendar_file;
    std::optional<std::filesystem::path> store;
    std::optional<std::filesystem::path> bars_path;
    std::optional<std::filesystem::path> news_path;
    std::optional<std::filesystem::path> docs_path;
    Timestamp start;
    Timestamp end;
    std::optional<market::Frequency> frequency;
    double initial_cash = 10000.0;
    std::string policy = "buy_and_hold";  // scripted kind, or "remote"
    nlohmann::json policy_params = nlohmann::json::object();
    int tool_budget = toolserver::kDefaultToolBudget;
    std::optional<std::int64_t> seed;
    std::optional<std::string> baseline_symbol;
    double fee_rate = 0.0;
    std::optional<double> periods_per_year;
    std::filesystem::path out;  // default runs/<run_id> under the working directory
    std::string run_id = "run";
};

/// Parses a config object. Relative paths resolve against `base_dir`.
/// Throws Error(config_error).
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& file);

/// Fully resolved config as written to config.json (without the digest).
nlohmann::json effective_config(const RunConfig& config, const market::MarketSpec& spec);
/// SHA-256 of the canonical dump of a config with any config_digest removed.
std::string config_digest(nlohmann::json config);

market::MarketSpec build_market(const RunConfig& config);
data::DataStore build_store(const RunConfig& config);

/// Baseline instrument marked like the agent: close of its bar at each
/// decision clock, stamped at the record's mark time.
std::vector<agent::EquityPoint> baseline_curve(const data::DataStore& store, const std::string& symbol,
                                               std::span<const agent::DecisionRecord> records);

/// Cross-checks a log directory against the store: fill prices, position
/// chain, marks, equity curve and config digest. Throws Error(corrupt_log).
void verify_logs(const agent::SessionLogs& logs, const market::MarketSpec& spec, const data::DataStore& store);

/// Recomputes the metric report for a log directory from raw logs and the
/// store it references (or `store_override`).
metrics::MetricReport recompute_report(const std::filesystem::path& run_dir,
                                       const std::optional<std::filesystem::path>& store_override = std::nullopt);

/// Entry point shared by the `arena` binary and tests. argv[0] is ignored.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arena::cli
