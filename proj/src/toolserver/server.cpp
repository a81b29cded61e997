#include "arena/toolserver/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>
#include <thread>
#include <vector>

#include "arena/core/error.hpp"

namespace arena::toolserver {

ToolServer::ToolServer(const market::MarketSpec& spec, const data::DataStore& store)
    : spec_(spec), store_(store) {
    if (!store.frozen()) {
        throw Error(Errc::store_not_frozen, "tool server needs a frozen datastore");
    }
}

std::string ToolServer::open_session(const SessionConfig& config) {
    std::string token;
    {
        std::lock_guard lock(mutex_);
        token = "s-" + std::to_string(next_token_++);
    }
    auto slot = std::make_shared<Slot>();
    slot->session = std::make_unique<Session>(token, spec_, store_, config);
    std::lock_guard lock(mutex_);
    sessions_.emplace(token, std::move(slot));
    return token;
}

std::shared_ptr<ToolServer::Slot> ToolServer::find(const std::string& token) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(token);
    return it == sessions_.end() ? nullptr : it->second;
}

nlohmann::json ToolServer::handle(const ToolRequest& request) {
    auto slot = find(request.session);
    if (!slot) {
        return make_error(request.id, codes::session_not_found, "no session '" + request.session + "'");
    }
    std::lock_guard lock(slot->mutex);
    try {
        return slot->session->handle(request);
    } catch (const std::exception& e) {
        return make_error(request.id, codes::internal_error, e.what());
    }
}

std::string ToolServer::handle_line(std::string_view line) {
    auto parsed = parse_request(line);
    if (auto* failure = std::get_if<ParseFailure>(&parsed)) {
        return make_error(failure->id, failure->code, failure->message).dump();
    }
    return handle(std::get<ToolRequest>(parsed)).dump();
}

std::string ToolServer::handle_line(std::string_view line, const std::string& bound_session) {
    auto parsed = parse_request(line);
    if (auto* failure = std::get_if<ParseFailure>(&parsed)) {
        return make_error(failure->id, failure->code, failure->message).dump();
    }
    const auto& request = std::get<ToolRequest>(parsed);
    if (request.session != bound_session) {
        return make_error(request.id, codes::session_not_found,
                          "this connection serves session '" + bound_session + "'")
            .dump();
    }
    return handle(request).dump();
}

void ToolServer::with_session(const std::string& token, const std::function<void(Session&)>& fn) {
    auto slot = find(token);
    if (!slot) {
        throw Error(Errc::invalid_params, "no session '" + token + "'");
    }
    std::lock_guard lock(slot->mutex);
    fn(*slot->session);
}

agent::SessionResult ToolServer::close_session(const std::string& token) {
    std::shared_ptr<Slot> slot;
    {
        std::lock_guard lock(mutex_);
        auto it = sessions_.find(token);
        if (it == sessions_.end()) {
            throw Error(Errc::invalid_params, "no session '" + token + "'");
        }
        slot = it->second;
        sessions_.erase(it);
    }
    std::lock_guard lock(slot->mutex);
    slot->session->close_pending();
    return slot->session->result();
}

nlohmann::json greeting(ToolServer& server, const std::string& token) {
    nlohmann::json hello;
    server.with_session(token, [&](Session& s) {
        hello = {{"session", token},
                 {"protocol", "arena-tools/1"},
                 {"market", market::to_string(s.spec().market_id)},
                 {"frequency", market::to_string(s.spec().frequency)},
                 {"clock", format_timestamp(s.clock())},
                 {"decisions", s.schedule().size()},
                 {"budget", s.budget()}};
    });
    return {{"hello", hello}};
}

void serve_stream(ToolServer& server, const SessionConfig& config, std::istream& in, std::ostream& out,
                  const SessionEndHandler& on_end) {
    const std::string token = server.open_session(config);
    out << greeting(server, token).dump() << '\n' << std::flush;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        out << server.handle_line(line, token) << '\n' << std::flush;
    }
    auto result = server.close_session(token);
    if (on_end) {
        on_end(token, result);
    }
}

namespace {

bool send_all(int fd, const std::string& data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) {
                continue;
            }
            return false;
        }
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

}  // namespace

TcpServer::TcpServer(ToolServer& server, SessionConfig config, std::uint16_t port)
    : server_(server), config_(config) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) {
        throw Error(Errc::io_error, std::string("socket: ") + std::strerror(errno));
    }
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        int err = errno;
        ::close(listen_fd_);
        listen_fd_ = -1;
        if (err == EADDRINUSE || err == EACCES) {
            throw Error(Errc::port_in_use, "port " + std::to_string(port) + " is not available");
        }
        throw Error(Errc::io_error, std::string("bind: ") + std::strerror(err));
    }
    if (::listen(listen_fd_, 16) != 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw Error(Errc::io_error, std::string("listen: ") + std::strerror(errno));
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpServer::~TcpServer() {
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
    }
}

void TcpServer::stop() {
    stopping_ = true;
}

void TcpServer::run(const SessionEndHandler& on_end, std::size_t max_sessions) {
    std::vector<std::thread> clients;
    std::size_t accepted = 0;
    while (!stopping_ && (max_sessions == 0 || accepted < max_sessions)) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        int ready = ::poll(&pfd, 1, 100);
        if (ready <= 0) {
            continue;
        }
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            continue;
        }
        ++accepted;
        clients.emplace_back([this, fd, &on_end] { serve_client(fd, on_end); });
    }
    for (auto& t : clients) {
        t.join();
    }
}

void TcpServer::serve_client(int fd, const SessionEndHandler& on_end) {
    std::string token;
    try {
        token = server_.open_session(config_);
    } catch (const Error& e) {
        send_all(fd, make_error(0, to_string(e.code()), e.what()).dump() + "\n");
        ::close(fd);
        return;
    }
    bool alive = send_all(fd, greeting(server_, token).dump() + "\n");
    std::string buffer;
    bool discarding = false;  // inside an oversized line
    char chunk[4096];
    while (alive && !stopping_) {
        pollfd pfd{fd, POLLIN, 0};
        int ready = ::poll(&pfd, 1, 100);
        if (ready == 0 || (ready < 0 && errno == EINTR)) {
            continue;
        }
        if (ready < 0) {
            break;
        }
        ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            break;
        }
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t newline;
        while (alive && (newline = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, newline);
            buffer.erase(0, newline + 1);
            if (discarding) {
                discarding = false;
                continue;
            }
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            alive = send_all(fd, server_.handle_line(line, token) + "\n");
        }
        if (alive && buffer.size() > kMaxLineBytes) {
            buffer.clear();
            if (discarding) {
                continue;
            }
            discarding = true;
            alive = send_all(fd, make_error(0, codes::invalid_request, "line exceeds 1 MiB").dump() + "\n");
        }
    }
    ::close(fd);
    auto result = server_.close_session(token);
    if (on_end) {
        on_end(token, result);
    }
}

}  // namespace arena::toolserver
