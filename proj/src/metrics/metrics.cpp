#include "arena/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "arena/core/error.hpp"

namespace arena::metrics {

ReturnSeries equity_to_returns(std::span<const double> valuations, double periods_per_year) {
    if (valuations.size() < 2) {
        throw Error(Errc::too_short, "equity curve needs at least two points, got " + std::to_string(valuations.size()));
    }
    ReturnSeries out;
    out.periods_per_year = periods_per_year;
    out.returns.reserve(valuations.size() - 1);
    for (std::size_t i = 0; i < valuations.size(); ++i) {
        if (!(valuations[i] > 0.0) || !std::isfinite(valuations[i])) {
            throw Error(Errc::non_positive_valuation, "valuation at point " + std::to_string(i) + " is not positive");
        }
        if (i > 0) {
            out.returns.push_back(valuations[i] / valuations[i - 1] - 1.0);
        }
    }
    return out;
}

ReturnSeries equity_to_returns(std::span<const agent::EquityPoint> curve, double periods_per_year) {
    std::vector<double> v;
    v.reserve(curve.size());
    for (const auto& p : curve) {
        v.push_back(p.valuation);
    }
    return equity_to_returns(v, periods_per_year);
}

double cumulative_return(const ReturnSeries& series) {
    double growth = 1.0;
    for (double r : series.returns) {
        growth *= 1.0 + r;
    }
    return 100.0 * (growth - 1.0);
}

double mean_return(const ReturnSeries& series) {
    if (series.returns.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (double r : series.returns) {
        sum += r;
    }
    return sum / static_cast<double>(series.returns.size());
}

double downside_deviation(const ReturnSeries& series, double target) {
    if (series.returns.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (double r : series.returns) {
        const double d = std::min(r - target, 0.0);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(series.returns.size()));
}

std::optional<double> sortino(const ReturnSeries& series, double target, bool annualize) {
    const double dd = downside_deviation(series, target);
    if (dd == 0.0) {
        return std::nullopt;
    }
    double ratio = (mean_return(series) - target) / dd;
    if (annualize) {
        ratio *= std::sqrt(series.periods_per_year);
    }
    return ratio;
}

double volatility(const ReturnSeries& series, bool annualize) {
    const auto n = series.returns.size();
    if (n < 2) {
        throw Error(Errc::too_short, "volatility needs at least two returns, got " + std::to_string(n));
    }
    // Welford
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t k = 0;
    for (double r : series.returns) {
        ++k;
        const double delta = r - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (r - mean);
    }
    double sd = std::sqrt(m2 / static_cast<double>(n - 1));
    if (annualize) {
        sd *= std::sqrt(series.periods_per_year);
    }
    return 100.0 * sd;
}

double max_drawdown(const ReturnSeries& series) {
    double value = 1.0;
    double peak = 1.0;
    double worst = 0.0;
    for (double r : series.returns) {
        value *= 1.0 + r;
        peak = std::max(peak, value);
        worst = std::min(worst, (value - peak) / peak);
    }
    return 100.0 * worst;
}

TradeStats trade_stats(std::span<const agent::DecisionRecord> records) {
    if (records.empty()) {
        throw Error(Errc::empty_log, "no decision records");
    }
    std::size_t idle = 0;
    std::size_t fills = 0;
    for (const auto& r : records) {
        idle += r.fills.empty() ? 1 : 0;
        fills += r.fills.size();
    }
    const auto n = static_cast<double>(records.size());
    return {static_cast<double>(idle) / n, static_cast<double>(fills) / n};
}

double excess_return(double agent_cr, double baseline_cr) { return agent_cr - baseline_cr; }

double compare_to_baseline(std::span<const agent::EquityPoint> agent_curve,
                           std::span<const agent::EquityPoint> baseline_curve, double periods_per_year) {
    if (agent_curve.empty() || baseline_curve.empty() || agent_curve.size() != baseline_curve.size() ||
        agent_curve.front().ts != baseline_curve.front().ts || agent_curve.back().ts != baseline_curve.back().ts) {
        throw Error(Errc::window_mismatch, "agent and baseline curves cover different windows");
    }
    return excess_return(cumulative_return(equity_to_returns(agent_curve, periods_per_year)),
                         cumulative_return(equity_to_returns(baseline_curve, periods_per_year)));
}

MetricReport compute_report(const agent::SessionResult& result, double periods_per_year,
                            std::span<const agent::EquityPoint> baseline_curve) {
    MetricReport rep;
    rep.periods_per_year = periods_per_year;
    rep.decisions = static_cast<int>(result.records.size());
    const auto stats = trade_stats(result.records);
    rep.no_exec = stats.no_exec;
    rep.avg_trades = stats.avg_trades;

    const auto series = equity_to_returns(result.equity_curve, periods_per_year);
    rep.cr = cumulative_return(series);
    rep.sortino = sortino(series);
    if (series.returns.size() >= 2) {
        rep.vol = volatility(series);
    }
    rep.mdd = max_drawdown(series);
    rep.mean_return = mean_return(series);
    rep.downside_dev = downside_deviation(series);
    if (!baseline_curve.empty()) {
        rep.excess_cr = compare_to_baseline(result.equity_curve, baseline_curve, periods_per_year);
        rep.baseline_cr = cumulative_return(equity_to_returns(baseline_curve, periods_per_year));
    }
    return rep;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> read_opt(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) {
        return std::nullopt;
    }
    return j[key].get<double>();
}

std::string cell(const std::optional<double>& v) {
    if (!v) {
        return "n/a";
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    std::string text(buf);
    return text == "-0.00" ? "0.00" : text;
}

}  // namespace

nlohmann::json to_json(const MetricReport& r) {
    return {
        {"cr", r.cr},
        {"sortino", opt(r.sortino)},
        {"vol", opt(r.vol)},
        {"mdd", r.mdd},
        {"mean_return", r.mean_return},
        {"downside_dev", r.downside_dev},
        {"no_exec", r.no_exec},
        {"avg_trades", r.avg_trades},
        {"baseline_cr", opt(r.baseline_cr)},
        {"excess_cr", opt(r.excess_cr)},
        {"periods_per_year", r.periods_per_year},
        {"decisions", r.decisions},
    };
}

MetricReport report_from_json(const nlohmann::json& j) {
    MetricReport r;
    try {
        r.cr = j.at("cr").get<double>();
        r.sortino = read_opt(j, "sortino");
        r.vol = read_opt(j, "vol");
        r.mdd = j.at("mdd").get<double>();
        r.mean_return = j.at("mean_return").get<double>();
        r.downside_dev = j.at("downside_dev").get<double>();
        r.no_exec = j.at("no_exec").get<double>();
        r.avg_trades = j.at("avg_trades").get<double>();
        r.baseline_cr = read_opt(j, "baseline_cr");
        r.excess_cr = read_opt(j, "excess_cr");
        r.periods_per_year = j.at("periods_per_year").get<double>();
        r.decisions = j.at("decisions").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::corrupt_log, std::string("bad metric report: ") + e.what());
    }
    return r;
}

std::vector<std::string> diff_reports(const MetricReport& a, const MetricReport& b, double tol) {
    std::vector<std::string> out;
    auto num = [&](const char* name, double x, double y) {
        if (!(std::fabs(x - y) <= tol)) {
            out.emplace_back(name);
        }
    };
    auto maybe = [&](const char* name, const std::optional<double>& x, const std::optional<double>& y) {
        if (x.has_value() != y.has_value()) {
            out.emplace_back(name);
        } else if (x) {
            num(name, *x, *y);
        }
    };
    num("cr", a.cr, b.cr);
    maybe("sortino", a.sortino, b.sortino);
    maybe("vol", a.vol, b.vol);
    num("mdd", a.mdd, b.mdd);
    num("mean_return", a.mean_return, b.mean_return);
    num("downside_dev", a.downside_dev, b.downside_dev);
    num("no_exec", a.no_exec, b.no_exec);
    num("avg_trades", a.avg_trades, b.avg_trades);
    maybe("baseline_cr", a.baseline_cr, b.baseline_cr);
    maybe("excess_cr", a.excess_cr, b.excess_cr);
    num("periods_per_year", a.periods_per_year, b.periods_per_year);
    if (a.decisions != b.decisions) {
        out.emplace_back("decisions");
    }
    return out;
}

std::string render_table(const std::vector<std::pair<std::string, MetricReport>>& runs) {
    std::vector<std::string> headers{"Metric"};
    for (const auto& [name, rep] : runs) {
        headers.push_back(name);
    }
    // One baseline column when every run shares it (same market and window),
    // otherwise a per-run row.
    std::optional<double> baseline;
    bool shared = true;
    for (const auto& [name, rep] : runs) {
        if (!rep.baseline_cr) {
            continue;
        }
        if (baseline && *baseline != *rep.baseline_cr) {
            shared = false;
        }
        baseline = rep.baseline_cr;
    }
    if (!shared) {
        baseline.reset();
    }
    if (baseline) {
        headers.emplace_back("Baseline");
    }

    std::vector<std::vector<std::string>> rows;
    auto add = [&](const std::string& label, auto pick, std::optional<double> base) {
        std::vector<std::string> row{label};
        for (const auto& [name, rep] : runs) {
            row.push_back(cell(pick(rep)));
        }
        if (baseline) {
            row.push_back(base ? cell(base) : "");
        }
        rows.push_back(std::move(row));
    };
    add("CR(%)", [](const MetricReport& r) { return std::optional<double>(r.cr); }, baseline);
    add("SR", [](const MetricReport& r) { return r.sortino; }, std::nullopt);
    add("Vol(%)", [](const MetricReport& r) { return r.vol; }, std::nullopt);
    add("MDD(%)", [](const MetricReport& r) { return std::optional<double>(r.mdd); }, std::nullopt);
    if (!shared) {
        add("BaseCR(%)", [](const MetricReport& r) { return r.baseline_cr; }, std::nullopt);
    }
    add("Excess(%)", [](const MetricReport& r) { return r.excess_cr; }, std::nullopt);
    add("NoExec", [](const MetricReport& r) { return std::optional<double>(r.no_exec); }, std::nullopt);
    add("AvgTrades", [](const MetricReport& r) { return std::optional<double>(r.avg_trades); }, std::nullopt);

    std::vector<std::size_t> width(headers.size(), 0);
    for (std::size_t c = 0; c < headers.size(); ++c) {
        width[c] = headers[c].size();
        for (const auto& row : rows) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == 0) {
                out += cells[c] + std::string(width[c] - cells[c].size(), ' ');
            } else {
                out += "  " + std::string(width[c] - cells[c].size(), ' ') + cells[c];
            }
        }
        out += '\n';
    };
    line(headers);
    for (const auto& row : rows) {
        line(row);
    }
    return out;
}

}  // namespace arena::metrics
