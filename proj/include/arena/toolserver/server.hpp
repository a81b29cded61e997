#pragma once

#include <atomic>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include <json.hpp>

#include "arena/toolserver/session.hpp"

namespace arena::toolserver {

/// Session registry plus the line-level protocol entry point. Sessions run
/// concurrently; requests for one session are serialized in arrival order.
/// The market spec and datastore are shared read-only.
class ToolServer {
public:
    ToolServer(const market::MarketSpec& spec, const data::DataStore& store);

    /// Creates a session and returns its token ("s-1", "s-2", ...).
    std::string open_session(const SessionConfig& config);

    nlohmann::json handle(const ToolRequest& request);
    /// Parses one request line and returns the response line (no newline).
    /// Malformed lines get an error response with id 0.
    std::string handle_line(std::string_view line);
    /// Same, for a connection bound to one session: requests naming any other
    /// session get `session_not_found`.
    std::string handle_line(std::string_view line, const std::string& bound_session);

    /// Runs `fn` with exclusive access to a session. Throws
    /// Error(invalid_params) for unknown tokens.
    void with_session(const std::string& token, const std::function<void(Session&)>& fn);

    /// Closes any pending decision, removes the session, returns its result.
    agent::SessionResult close_session(const std::string& token);

    const market::MarketSpec& spec() const noexcept { return spec_; }
    const data::DataStore& store() const noexcept { return store_; }

private:
    struct Slot {
        std::mutex mutex;
        std::unique_ptr<Session> session;
    };

    std::shared_ptr<Slot> find(const std::string& token) const;

    const market::MarketSpec& spec_;
    const data::DataStore& store_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::uint64_t next_token_ = 1;
};

inline constexpr std::size_t kMaxLineBytes = 1 << 20;

using SessionEndHandler = std::function<void(const std::string& token, const agent::SessionResult& result)>;

/// First line a client receives: `{"hello":{"session":...,"clock":...,...}}`.
nlohmann::json greeting(ToolServer& server, const std::string& token);

/// Serves one session over a pair of streams (stdio transport). Returns when
/// the input ends; `on_end` receives the session's result.
void serve_stream(ToolServer& server, const SessionConfig& config, std::istream& in, std::ostream& out,
                  const SessionEndHandler& on_end);

/// Newline-delimited JSON over TCP, one session per connection, one thread
/// per connection. Lines longer than kMaxLineBytes are answered with an
/// id-0 error and discarded.
class TcpServer {
public:
    /// Binds 127.0.0.1:`port` (0 picks a free port). Throws Error(port_in_use).
    TcpServer(ToolServer& server, SessionConfig config, std::uint16_t port);
    ~TcpServer();

    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    std::uint16_t port() const noexcept { return port_; }

    /// Accepts clients until `stop()` or until `max_sessions` sessions have
    /// ended (0 = unlimited). Blocks.
    void run(const SessionEndHandler& on_end, std::size_t max_sessions = 0);
    void stop();

private:
    void serve_client(int fd, const SessionEndHandler& on_end);

    ToolServer& server_;
    SessionConfig config_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
};

}  // namespace arena::toolserver
