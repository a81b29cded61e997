#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "arena/core/time.hpp"
#include "arena/data/datastore.hpp"
#include "arena/market/market_spec.hpp"

namespace arena::testing {

inline std::filesystem::path fixture_dir(const std::string& name) {
    return std::filesystem::path(ARENA_FIXTURE_DIR) / name;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("arena-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    return path;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Timestamp ts(const std::string& text) { return parse_timestamp_or_throw(text); }

/// Spec from an inline universe; the universe file lives in `dir`.
inline market::MarketSpec make_spec(const TempDir& dir, market::MarketId id, const std::vector<std::string>& symbols,
                                    const market::MarketOptions& options = {}) {
    std::string text;
    for (const auto& s : symbols) {
        text += s + "\n";
    }
    auto path = write_file(dir / ("universe-" + std::string(market::to_string(id)) + ".txt"), text);
    return market::load_market_spec(id, path, options);
}

inline data::DataStore frozen_store(const std::string& bars_csv, const std::string& news_jsonl = {},
                                    const std::string& docs_jsonl = {}) {
    data::DataStore store;
    std::istringstream bars(bars_csv);
    store.ingest_bars(bars);
    if (!news_jsonl.empty()) {
        std::istringstream news(news_jsonl);
        store.ingest_news(news);
    }
    if (!docs_jsonl.empty()) {
        std::istringstream docs(docs_jsonl);
        store.ingest_documents(docs);
    }
    store.freeze();
    return store;
}

/// Loads a bundled fixture's bars/news/docs into a frozen store.
inline data::DataStore fixture_store(const std::string& name) {
    data::DataStore store;
    auto dir = fixture_dir(name);
    store.ingest_bars(dir / "bars.csv");
    store.ingest_news(dir / "news.jsonl");
    store.ingest_documents(dir / "docs.jsonl");
    store.freeze();
    return store;
}

}  // namespace arena::testing
