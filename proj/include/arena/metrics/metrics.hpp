#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "arena/agent/decision_record.hpp"

namespace arena::metrics {

/// Per-period simple returns r_t plus the annualization factor.
struct ReturnSeries {
    std::vector<double> returns;
    double periods_per_year = 252.0;
};

/// returns[i] = V[i+1]/V[i] - 1. Throws Error(too_short) for fewer than two
/// points and Error(non_positive_valuation) for any V <= 0.
ReturnSeries equity_to_returns(std::span<const double> valuations, double periods_per_year);
ReturnSeries equity_to_returns(std::span<const agent::EquityPoint> curve, double periods_per_year);

/// 100 * (prod(1 + r) - 1).
double cumulative_return(const ReturnSeries& series);

double mean_return(const ReturnSeries& series);

/// sqrt(mean(min(r - target, 0)^2)), population form.
double downside_deviation(const ReturnSeries& series, double target = 0.0);

/// (mean - target) / downside_deviation, times sqrt(periods_per_year) when
/// annualized. nullopt when nothing falls below target.
std::optional<double> sortino(const ReturnSeries& series, double target = 0.0, bool annualize = true);

/// Sample standard deviation in percent, optionally annualized.
/// Throws Error(too_short) for fewer than two returns.
double volatility(const ReturnSeries& series, bool annualize = true);

/// Worst peak-to-trough decline of prod(1 + r), in percent (<= 0).
double max_drawdown(const ReturnSeries& series);

struct TradeStats {
    double no_exec = 0.0;
    double avg_trades = 0.0;
};

/// Throws Error(empty_log) when there are no records.
TradeStats trade_stats(std::span<const agent::DecisionRecord> records);

/// Percentage-point difference agent - baseline.
double excess_return(double agent_cr, double baseline_cr);

/// Checks the curves share first/last timestamps and length, then returns
/// the excess CR. Throws Error(window_mismatch).
double compare_to_baseline(std::span<const agent::EquityPoint> agent_curve,
                           std::span<const agent::EquityPoint> baseline_curve, double periods_per_year);

struct MetricReport {
    double cr = 0.0;
    std::optional<double> sortino;
    std::optional<double> vol;
    double mdd = 0.0;
    double mean_return = 0.0;
    double downside_dev = 0.0;
    double no_exec = 0.0;
    double avg_trades = 0.0;
    std::optional<double> baseline_cr;
    std::optional<double> excess_cr;
    double periods_per_year = 252.0;
    int decisions = 0;

    bool operator==(const MetricReport&) const = default;
};

/// Metrics for one session. `baseline_curve`, when given, must cover the
/// same marks as the session's equity curve.
MetricReport compute_report(const agent::SessionResult& result, double periods_per_year,
                            std::span<const agent::EquityPoint> baseline_curve = {});

nlohmann::json to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& j);

/// Field-by-field comparison with an absolute tolerance. Returns the names
/// of fields that differ.
std::vector<std::string> diff_reports(const MetricReport& a, const MetricReport& b, double tol);

/// Fixed-width table, one column per run plus a baseline column taken from
/// the first run that has one. Rows CR, SR, Vol, MDD, then trade activity.
std::string render_table(const std::vector<std::pair<std::string, MetricReport>>& runs);

}  // namespace arena::metrics
