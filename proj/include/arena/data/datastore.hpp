#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arena/core/time.hpp"
#include "arena/data/records.hpp"

namespace arena::data {

/// Maps canonical bar columns (symbol, ts, open, high, low, close, volume) to
/// the header names used by a particular CSV. Unmapped columns use their
/// canonical name.
using ColumnMapping = std::map<std::string, std::string>;

struct StoreCounts {
    std::size_t bars = 0;
    std::size_t symbols = 0;
    std::size_t news = 0;
    std::size_t documents = 0;
};

/// Point-in-time store of bars, news and search documents.
///
/// Two phases: ingestion (mutable, queries rejected) and frozen (immutable,
/// safe for concurrent readers, ingestion rejected). Every query takes the
/// caller's simulated clock `t_now` and never returns a record stamped after it.
class DataStore {
public:
    /// Ingest is all-or-nothing: on any error the store is left unchanged.
    std::size_t ingest_bars(const std::filesystem::path& path, const ColumnMapping& mapping = {});
    std::size_t ingest_bars(std::istream& csv, const ColumnMapping& mapping = {});
    std::size_t ingest_news(const std::filesystem::path& path);
    std::size_t ingest_news(std::istream& jsonl);
    std::size_t ingest_documents(const std::filesystem::path& path);
    std::size_t ingest_documents(std::istream& jsonl);

    void freeze();
    bool frozen() const noexcept { return frozen_; }

    /// Latest bar with ts <= t_now.
    const Bar& price_at(std::string_view symbol, Timestamp t_now) const;
    /// Bars with from <= ts <= min(to, t_now), ascending.
    std::vector<Bar> bars_range(std::string_view symbol, Timestamp from, Timestamp to, Timestamp t_now) const;
    /// Up to `limit` bars ending at the latest bar <= t_now, ascending.
    std::vector<Bar> last_bars(std::string_view symbol, std::size_t limit, Timestamp t_now) const;
    /// Documents whose title+body contain every query token (case-insensitive),
    /// newest first, ties by id.
    std::vector<Document> search_docs(std::string_view query, Timestamp t_now, std::size_t limit) const;
    /// News with published_at in (since, t_now], newest first, ties by id.
    std::vector<NewsItem> news_query(const std::optional<std::string>& symbol,
                                     const std::optional<Timestamp>& since, Timestamp t_now,
                                     std::size_t limit) const;

    bool has_symbol(std::string_view symbol) const;
    /// All bars of a symbol, no clock applied. For audit and report tooling.
    std::span<const Bar> series(std::string_view symbol) const;
    std::vector<std::string> symbols() const;
    StoreCounts counts() const;

    /// Writes a frozen image (bars.csv, news.jsonl, docs.jsonl, manifest.json).
    void save_image(const std::filesystem::path& dir) const;
    /// Loads and verifies an image written by save_image; the result is frozen.
    static DataStore load_image(const std::filesystem::path& dir);

private:
    struct IndexedDocument {
        Document doc;
        std::vector<std::string> tokens;  // sorted, unique, lowercase
    };

    void require_frozen() const;
    void require_mutable() const;

    std::map<std::string, std::vector<Bar>, std::less<>> bars_;
    std::vector<NewsItem> news_;       // published_at desc, id asc
    std::vector<IndexedDocument> docs_;  // ts desc, id asc
    bool frozen_ = false;
};

/// Lowercased alphanumeric tokens of `text`.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace arena::data
