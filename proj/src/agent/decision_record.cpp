#include "arena/agent/decision_record.hpp"

#include "arena/core/error.hpp"

namespace arena::agent {

nlohmann::json to_json(const DecisionRecord& r) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& e : r.tool_trace) {
        trace.push_back({{"request", e.request}, {"response", e.response}});
    }
    nlohmann::json fills = nlohmann::json::array();
    for (const auto& f : r.fills) {
        fills.push_back(portfolio::to_json(f));
    }
    nlohmann::json j = {
        {"v", kDecisionLogVersion},
        {"index", r.index},
        {"clock", format_timestamp(r.clock)},
        {"mark_ts", format_timestamp(r.mark_ts)},
        {"reasoning", r.reasoning},
        {"tool_trace", std::move(trace)},
        {"fills", std::move(fills)},
        {"rejections", r.rejections},
        {"end_positions", portfolio::snapshot(r.end_positions)},
        {"end_valuation", r.end_valuation},
    };
    j["fault"] = r.fault ? nlohmann::json(*r.fault) : nlohmann::json(nullptr);
    j[kWallTimeField] = r.wall_time;
    return j;
}

DecisionRecord record_from_json(const nlohmann::json& j) {
    try {
        if (j.at("v").get<int>() != kDecisionLogVersion) {
            throw Error(Errc::corrupt_log, "unsupported decision log version");
        }
        DecisionRecord r;
        r.index = j.at("index").get<int>();
        r.clock = parse_timestamp_or_throw(j.at("clock").get<std::string>());
        r.mark_ts = parse_timestamp_or_throw(j.at("mark_ts").get<std::string>());
        r.reasoning = j.at("reasoning").get<std::vector<std::string>>();
        for (const auto& e : j.at("tool_trace")) {
            r.tool_trace.push_back({e.at("request"), e.at("response")});
        }
        for (const auto& f : j.at("fills")) {
            r.fills.push_back(portfolio::fill_from_json(f));
        }
        r.rejections = j.at("rejections").get<int>();
        r.end_positions = portfolio::from_snapshot(j.at("end_positions"));
        r.end_valuation = j.at("end_valuation").get<double>();
        if (!j.at("fault").is_null()) {
            r.fault = j.at("fault").get<std::string>();
        }
        r.wall_time = j.value(kWallTimeField, "");
        return r;
    } catch (const Error& e) {
        throw Error(Errc::corrupt_log, std::string("decision record: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::corrupt_log, std::string("decision record: ") + e.what());
    }
}

}  // namespace arena::agent
