#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "arena/core/time.hpp"

namespace arena::data {

/// One OHLCV bar; `ts` is the bar's open time.
struct Bar {
    std::string symbol;
    Timestamp ts;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;

    bool operator==(const Bar&) const = default;
};

struct NewsItem {
    std::string id;
    Timestamp published_at;
    std::vector<std::string> symbols;
    std::string summary;
    std::optional<double> sentiment;

    bool operator==(const NewsItem&) const = default;
};

struct Document {
    std::string id;
    Timestamp ts;
    std::string title;
    std::string body;
    std::string source;

    bool operator==(const Document&) const = default;
};

nlohmann::json to_json(const Bar& bar);
nlohmann::json to_json(const NewsItem& item);
nlohmann::json to_json(const Document& doc);

}  // namespace arena::data
