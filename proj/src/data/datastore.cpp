#include "arena/data/datastore.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "arena/core/digest.hpp"
#include "arena/core/error.hpp"

namespace arena::data {

namespace {

constexpr std::array<std::string_view, 7> kBarColumns = {"symbol", "ts",    "open",  "high",
                                                         "low",    "close", "volume"};

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
            field.remove_suffix(1);
        out.push_back(field);
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void bad_row(std::size_t row, const std::string& why) {
    throw Error(Errc::malformed_row, "row " + std::to_string(row) + ": " + why);
}

double parse_number(std::string_view text, std::size_t row, std::string_view column) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
        bad_row(row, "bad " + std::string(column) + " '" + std::string(text) + "'");
    }
    return value;
}

Timestamp json_time(const nlohmann::json& obj, const char* key, std::size_t row) {
    if (!obj.contains(key) || !obj[key].is_string()) {
        bad_row(row, std::string("missing string field '") + key + "'");
    }
    auto ts = parse_timestamp(obj[key].get<std::string>());
    if (!ts) {
        bad_row(row, std::string("bad timestamp in '") + key + "'");
    }
    return *ts;
}

std::string json_string(const nlohmann::json& obj, const char* key, std::size_t row, bool required) {
    if (!obj.contains(key) || obj[key].is_null()) {
        if (required) {
            bad_row(row, std::string("missing field '") + key + "'");
        }
        return {};
    }
    if (!obj[key].is_string()) {
        bad_row(row, std::string("field '") + key + "' must be a string");
    }
    return obj[key].get<std::string>();
}

template <typename Fn>
void for_each_jsonl(std::istream& in, Fn&& fn) {
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            bad_row(row, "not a JSON object");
        }
        fn(obj, row);
    }
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << bytes)) {
        throw Error(Errc::io_error, "cannot write " + path.string());
    }
}

bool news_order(const NewsItem& a, const NewsItem& b) {
    return a.published_at != b.published_at ? a.published_at > b.published_at : a.id < b.id;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) {
        out.push_back(std::move(cur));
    }
    return out;
}

void DataStore::require_frozen() const {
    if (!frozen_) {
        throw Error(Errc::store_not_frozen, "queries are rejected until the store is frozen");
    }
}

void DataStore::require_mutable() const {
    if (frozen_) {
        throw Error(Errc::store_frozen, "store is frozen; ingestion is closed");
    }
}

void DataStore::freeze() {
    frozen_ = true;
}

std::size_t DataStore::ingest_bars(const std::filesystem::path& path, const ColumnMapping& mapping) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::io_error, "no such file: " + path.string());
    }
    return ingest_bars(in, mapping);
}

std::size_t DataStore::ingest_bars(std::istream& csv, const ColumnMapping& mapping) {
    require_mutable();
    std::string line;
    if (!std::getline(csv, line)) {
        bad_row(0, "missing header");
    }
    auto header = split_csv(line);
    std::array<std::size_t, kBarColumns.size()> index{};
    for (std::size_t c = 0; c < kBarColumns.size(); ++c) {
        std::string wanted(kBarColumns[c]);
        if (auto it = mapping.find(wanted); it != mapping.end()) {
            wanted = it->second;
        }
        auto pos = std::find(header.begin(), header.end(), wanted);
        if (pos == header.end()) {
            bad_row(0, "header lacks column '" + wanted + "'");
        }
        index[c] = static_cast<std::size_t>(pos - header.begin());
    }

    struct Staged {
        Bar bar;
        std::size_t row;
    };
    std::vector<Staged> staged;
    std::size_t row = 0;
    while (std::getline(csv, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        auto fields = split_csv(line);
        if (fields.size() != header.size()) {
            bad_row(row, "expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        Bar bar;
        bar.symbol = std::string(fields[index[0]]);
        if (bar.symbol.empty()) {
            bad_row(row, "empty symbol");
        }
        auto ts = parse_timestamp(fields[index[1]]);
        if (!ts) {
            bad_row(row, "bad ts '" + std::string(fields[index[1]]) + "'");
        }
        bar.ts = *ts;
        bar.open = parse_number(fields[index[2]], row, "open");
        bar.high = parse_number(fields[index[3]], row, "high");
        bar.low = parse_number(fields[index[4]], row, "low");
        bar.close = parse_number(fields[index[5]], row, "close");
        bar.volume = parse_number(fields[index[6]], row, "volume");
        const bool prices_ok = bar.open > 0 && bar.high > 0 && bar.low > 0 && bar.close > 0;
        if (!prices_ok || bar.volume < 0 || bar.low > std::min(bar.open, bar.close) ||
            std::max(bar.open, bar.close) > bar.high) {
            throw Error(Errc::ohlc_violation, "row " + std::to_string(row) + ": OHLC invariant violated for " +
                                                  bar.symbol + " at " + format_timestamp(bar.ts));
        }
        staged.push_back({std::move(bar), row});
    }

    // Duplicates are checked against both the file itself and the existing store.
    std::set<std::pair<std::string, Timestamp>> keys;
    for (const auto& s : staged) {
        auto key = std::make_pair(s.bar.symbol, s.bar.ts);
        bool existing = false;
        if (auto it = bars_.find(s.bar.symbol); it != bars_.end()) {
            existing = std::binary_search(it->second.begin(), it->second.end(), s.bar,
                                          [](const Bar& a, const Bar& b) { return a.ts < b.ts; });
        }
        if (existing || !keys.insert(key).second) {
            throw Error(Errc::duplicate_bar, "row " + std::to_string(s.row) + ": duplicate bar " +
                                                 s.bar.symbol + " at " + format_timestamp(s.bar.ts));
        }
    }

    for (auto& s : staged) {
        bars_[s.bar.symbol].push_back(std::move(s.bar));
    }
    for (auto& [symbol, series] : bars_) {
        std::sort(series.begin(), series.end(), [](const Bar& a, const Bar& b) { return a.ts < b.ts; });
    }
    return staged.size();
}

std::size_t DataStore::ingest_news(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::io_error, "no such file: " + path.string());
    }
    return ingest_news(in);
}

std::size_t DataStore::ingest_news(std::istream& jsonl) {
    require_mutable();
    std::set<std::string> ids;
    for (const auto& n : news_) {
        ids.insert(n.id);
    }
    std::vector<NewsItem> staged;
    for_each_jsonl(jsonl, [&](const nlohmann::json& obj, std::size_t row) {
        NewsItem item;
        item.id = json_string(obj, "id", row, true);
        item.published_at = json_time(obj, "published_at", row);
        item.summary = json_string(obj, "summary", row, false);
        if (obj.contains("symbols") && !obj["symbols"].is_null()) {
            if (!obj["symbols"].is_array()) {
                bad_row(row, "symbols must be an array");
            }
            for (const auto& s : obj["symbols"]) {
                if (!s.is_string()) {
                    bad_row(row, "symbols must be strings");
                }
                item.symbols.push_back(s.get<std::string>());
            }
        }
        if (obj.contains("sentiment") && !obj["sentiment"].is_null()) {
            if (!obj["sentiment"].is_number()) {
                bad_row(row, "sentiment must be a number");
            }
            double s = obj["sentiment"].get<double>();
            if (!(s >= -1.0 && s <= 1.0)) {
                bad_row(row, "sentiment outside [-1, 1]");
            }
            item.sentiment = s;
        }
        if (!ids.insert(item.id).second) {
            bad_row(row, "duplicate news id '" + item.id + "'");
        }
        staged.push_back(std::move(item));
    });
    const std::size_t n = staged.size();
    news_.insert(news_.end(), std::make_move_iterator(staged.begin()), std::make_move_iterator(staged.end()));
    std::sort(news_.begin(), news_.end(), news_order);
    return n;
}

std::size_t DataStore::ingest_documents(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::io_error, "no such file: " + path.string());
    }
    return ingest_documents(in);
}

std::size_t DataStore::ingest_documents(std::istream& jsonl) {
    require_mutable();
    std::set<std::string> ids;
    for (const auto& d : docs_) {
        ids.insert(d.doc.id);
    }
    std::vector<IndexedDocument> staged;
    for_each_jsonl(jsonl, [&](const nlohmann::json& obj, std::size_t row) {
        IndexedDocument entry;
        entry.doc.id = json_string(obj, "id", row, true);
        entry.doc.ts = json_time(obj, "ts", row);
        entry.doc.title = json_string(obj, "title", row, false);
        entry.doc.body = json_string(obj, "body", row, false);
        entry.doc.source = json_string(obj, "source", row, false);
        if (!ids.insert(entry.doc.id).second) {
            bad_row(row, "duplicate document id '" + entry.doc.id + "'");
        }
        entry.tokens = tokenize(entry.doc.title + " " + entry.doc.body);
        std::sort(entry.tokens.begin(), entry.tokens.end());
        entry.tokens.erase(std::unique(entry.tokens.begin(), entry.tokens.end()), entry.tokens.end());
        staged.push_back(std::move(entry));
    });
    const std::size_t n = staged.size();
    docs_.insert(docs_.end(), std::make_move_iterator(staged.begin()), std::make_move_iterator(staged.end()));
    std::sort(docs_.begin(), docs_.end(), [](const IndexedDocument& a, const IndexedDocument& b) {
        return a.doc.ts != b.doc.ts ? a.doc.ts > b.doc.ts : a.doc.id < b.doc.id;
    });
    return n;
}

bool DataStore::has_symbol(std::string_view symbol) const {
    return bars_.find(symbol) != bars_.end();
}

std::span<const Bar> DataStore::series(std::string_view symbol) const {
    auto it = bars_.find(symbol);
    if (it == bars_.end()) {
        throw Error(Errc::unknown_symbol, "no bars for symbol '" + std::string(symbol) + "'");
    }
    return it->second;
}

std::vector<std::string> DataStore::symbols() const {
    std::vector<std::string> out;
    for (const auto& [symbol, series] : bars_) {
        out.push_back(symbol);
    }
    return out;
}

StoreCounts DataStore::counts() const {
    StoreCounts c;
    for (const auto& [symbol, series] : bars_) {
        c.bars += series.size();
    }
    c.symbols = bars_.size();
    c.news = news_.size();
    c.documents = docs_.size();
    return c;
}

const Bar& DataStore::price_at(std::string_view symbol, Timestamp t_now) const {
    require_frozen();
    auto s = series(symbol);
    auto it = std::upper_bound(s.begin(), s.end(), t_now,
                               [](Timestamp t, const Bar& b) { return t < b.ts; });
    if (it == s.begin()) {
        throw Error(Errc::no_data, "no bar for " + std::string(symbol) + " at or before " + format_timestamp(t_now));
    }
    return *std::prev(it);
}

std::vector<Bar> DataStore::bars_range(std::string_view symbol, Timestamp from, Timestamp to,
                                       Timestamp t_now) const {
    require_frozen();
    if (from > to) {
        throw Error(Errc::invalid_params, "bars_range: from is after to");
    }
    auto s = series(symbol);
    if (from > t_now) {
        throw Error(Errc::temporal_violation, "bars_range: from is after the simulated clock");
    }
    Timestamp hi = std::min(to, t_now);
    auto lo_it = std::lower_bound(s.begin(), s.end(), from, [](const Bar& b, Timestamp t) { return b.ts < t; });
    auto hi_it = std::upper_bound(s.begin(), s.end(), hi, [](Timestamp t, const Bar& b) { return t < b.ts; });
    if (lo_it >= hi_it) {
        return {};
    }
    return {lo_it, hi_it};
}

std::vector<Bar> DataStore::last_bars(std::string_view symbol, std::size_t limit, Timestamp t_now) const {
    require_frozen();
    auto s = series(symbol);
    auto end = std::upper_bound(s.begin(), s.end(), t_now, [](Timestamp t, const Bar& b) { return t < b.ts; });
    auto available = static_cast<std::size_t>(end - s.begin());
    auto begin = end - static_cast<std::ptrdiff_t>(std::min(limit, available));
    return {begin, end};
}

std::vector<Document> DataStore::search_docs(std::string_view query, Timestamp t_now, std::size_t limit) const {
    require_frozen();
    if (limit == 0) {
        throw Error(Errc::invalid_params, "limit must be at least 1");
    }
    auto wanted = tokenize(query);
    std::vector<Document> out;
    if (wanted.empty()) {
        return out;
    }
    auto first = std::lower_bound(docs_.begin(), docs_.end(), t_now,
                                  [](const IndexedDocument& d, Timestamp t) { return d.doc.ts > t; });
    for (auto it = first; it != docs_.end() && out.size() < limit; ++it) {
        bool all = std::all_of(wanted.begin(), wanted.end(), [&](const std::string& tok) {
            return std::binary_search(it->tokens.begin(), it->tokens.end(), tok);
        });
        if (all) {
            out.push_back(it->doc);
        }
    }
    return out;
}

std::vector<NewsItem> DataStore::news_query(const std::optional<std::string>& symbol,
                                            const std::optional<Timestamp>& since, Timestamp t_now,
                                            std::size_t limit) const {
    require_frozen();
    if (limit == 0) {
        throw Error(Errc::invalid_params, "limit must be at least 1");
    }
    if (since && *since > t_now) {
        throw Error(Errc::temporal_violation, "news: since is after the simulated clock");
    }
    std::vector<NewsItem> out;
    auto first = std::lower_bound(news_.begin(), news_.end(), t_now,
                                  [](const NewsItem& n, Timestamp t) { return n.published_at > t; });
    for (auto it = first; it != news_.end() && out.size() < limit; ++it) {
        if (since && it->published_at <= *since) {
            break;
        }
        if (symbol && std::find(it->symbols.begin(), it->symbols.end(), *symbol) == it->symbols.end()) {
            continue;
        }
        out.push_back(*it);
    }
    return out;
}

void DataStore::save_image(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::string bars = "symbol,ts,open,high,low,close,volume\n";
    for (const auto& [symbol, series] : bars_) {
        for (const auto& b : series) {
            bars += b.symbol + "," + format_timestamp(b.ts) + "," + fmt_double(b.open) + "," + fmt_double(b.high) +
                    "," + fmt_double(b.low) + "," + fmt_double(b.close) + "," + fmt_double(b.volume) + "\n";
        }
    }
    // Stored oldest first so the image reads naturally; order is restored on load.
    std::string news;
    for (auto it = news_.rbegin(); it != news_.rend(); ++it) {
        news += to_json(*it).dump() + "\n";
    }
    std::string docs;
    for (auto it = docs_.rbegin(); it != docs_.rend(); ++it) {
        docs += to_json(it->doc).dump() + "\n";
    }
    write_file(dir / "bars.csv", bars);
    write_file(dir / "news.jsonl", news);
    write_file(dir / "docs.jsonl", docs);
    auto c = counts();
    nlohmann::json manifest = {
        {"format", "arena-store"},
        {"version", 1},
        {"counts", {{"bars", c.bars}, {"symbols", c.symbols}, {"news", c.news}, {"documents", c.documents}}},
        {"sha256", {{"bars.csv", sha256_hex(bars)}, {"news.jsonl", sha256_hex(news)}, {"docs.jsonl", sha256_hex(docs)}}},
    };
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

DataStore DataStore::load_image(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) {
        throw Error(Errc::io_error, "no such file: " + (dir / "manifest.json").string());
    }
    nlohmann::json manifest = nlohmann::json::parse(mf, nullptr, false);
    if (manifest.is_discarded() || manifest.value("format", "") != "arena-store") {
        throw Error(Errc::io_error, "not a store image: " + dir.string());
    }
    for (const char* name : {"bars.csv", "news.jsonl", "docs.jsonl"}) {
        if (sha256_file(dir / name) != manifest["sha256"].value(name, "")) {
            throw Error(Errc::io_error, std::string("store image file modified since ingest: ") + name);
        }
    }
    DataStore store;
    store.ingest_bars(dir / "bars.csv");
    store.ingest_news(dir / "news.jsonl");
    store.ingest_documents(dir / "docs.jsonl");
    store.freeze();
    return store;
}

}  // namespace arena::data
