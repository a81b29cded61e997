#include "arena/toolserver/protocol.hpp"

#include <algorithm>

namespace arena::toolserver {

bool is_known_method(std::string_view method) noexcept {
    return std::find(kMethods.begin(), kMethods.end(), method) != kMethods.end();
}

bool is_budgeted_method(std::string_view method) noexcept {
    return is_known_method(method) && method != "observe" && method != "stop";
}

nlohmann::json ToolRequest::to_json() const {
    nlohmann::json j = {{"id", id}, {"session", session}, {"method", method}, {"params", params}};
    if (reasoning) {
        j["reasoning"] = *reasoning;
    }
    return j;
}

std::variant<ToolRequest, ParseFailure> parse_request(std::string_view line) {
    nlohmann::json j = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        return ParseFailure{0, codes::invalid_request, "request is not a JSON object"};
    }
    auto id_it = j.find("id");
    if (id_it == j.end() || !id_it->is_number_integer() || id_it->get<std::int64_t>() <= 0) {
        return ParseFailure{0, codes::invalid_request, "request id must be a positive integer"};
    }
    ToolRequest req;
    req.id = id_it->get<std::int64_t>();
    auto session_it = j.find("session");
    if (session_it == j.end() || !session_it->is_string()) {
        return ParseFailure{req.id, codes::invalid_request, "request lacks a session token"};
    }
    req.session = session_it->get<std::string>();
    auto method_it = j.find("method");
    if (method_it == j.end() || !method_it->is_string()) {
        return ParseFailure{req.id, codes::invalid_request, "request lacks a method"};
    }
    req.method = method_it->get<std::string>();
    if (auto p = j.find("params"); p != j.end() && !p->is_null()) {
        req.params = *p;
    }
    if (auto r = j.find("reasoning"); r != j.end() && r->is_string()) {
        req.reasoning = r->get<std::string>();
    }
    return req;
}

nlohmann::json make_result(std::int64_t id, nlohmann::json result) {
    return {{"id", id}, {"result", std::move(result)}};
}

nlohmann::json make_error(std::int64_t id, std::string_view code, std::string_view message) {
    return {{"id", id}, {"error", {{"code", code}, {"message", message}}}};
}

}  // namespace arena::toolserver
