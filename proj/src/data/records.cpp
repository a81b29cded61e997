#include "arena/data/records.hpp"

namespace arena::data {

nlohmann::json to_json(const Bar& bar) {
    return {{"symbol", bar.symbol}, {"ts", format_timestamp(bar.ts)}, {"open", bar.open},
            {"high", bar.high},     {"low", bar.low},                 {"close", bar.close},
            {"volume", bar.volume}};
}

nlohmann::json to_json(const NewsItem& item) {
    nlohmann::json j = {{"id", item.id},
                        {"published_at", format_timestamp(item.published_at)},
                        {"symbols", item.symbols},
                        {"summary", item.summary}};
    j["sentiment"] = item.sentiment ? nlohmann::json(*item.sentiment) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(const Document& doc) {
    return {{"id", doc.id},       {"ts", format_timestamp(doc.ts)}, {"title", doc.title},
            {"body", doc.body},   {"source", doc.source}};
}

}  // namespace arena::data
