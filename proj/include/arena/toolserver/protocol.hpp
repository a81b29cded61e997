#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

namespace arena::toolserver {

/// Methods accepted on the wire. The first five are the agent tools and
/// count against the per-decision budget; observe and stop are bookkeeping.
inline constexpr std::array<std::string_view, 7> kMethods = {"check_price", "search", "news", "math",
                                                             "trade",       "observe", "stop"};

bool is_known_method(std::string_view method) noexcept;
bool is_budgeted_method(std::string_view method) noexcept;

/// Protocol-level error codes (portfolio rejections use their own kind names).
namespace codes {
inline constexpr const char* unknown_method = "unknown_method";
inline constexpr const char* invalid_params = "invalid_params";
inline constexpr const char* invalid_request = "invalid_request";
inline constexpr const char* budget_exhausted = "budget_exhausted";
inline constexpr const char* session_not_found = "session_not_found";
inline constexpr const char* session_closed = "session_closed";
inline constexpr const char* internal_error = "internal_error";
}  // namespace codes

/// `{"id":1,"session":"s-1","method":"trade","params":{...}}` plus an optional
/// top-level `"reasoning"` string that is appended to the decision log.
struct ToolRequest {
    std::int64_t id = 0;
    std::string session;
    std::string method;
    nlohmann::json params = nlohmann::json::object();
    std::optional<std::string> reasoning;

    nlohmann::json to_json() const;
};

struct ParseFailure {
    std::int64_t id = 0;  // 0 unless the line carried a usable id
    std::string code;
    std::string message;
};

std::variant<ToolRequest, ParseFailure> parse_request(std::string_view line);

nlohmann::json make_result(std::int64_t id, nlohmann::json result);
nlohmann::json make_error(std::int64_t id, std::string_view code, std::string_view message);

inline bool is_error(const nlohmann::json& response) {
    return response.contains("error");
}
inline std::string error_code(const nlohmann::json& response) {
    return is_error(response) ? response["error"].value("code", "") : std::string{};
}

}  // namespace arena::toolserver
