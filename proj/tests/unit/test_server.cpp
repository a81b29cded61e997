#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "arena/core/error.hpp"
#include "arena/toolserver/server.hpp"
#include "helpers.hpp"

using namespace arena;
using namespace arena::toolserver;
using arena::testing::ts;
using nlohmann::json;

namespace {

struct Env {
    arena::testing::TempDir dir;
    market::MarketSpec spec;
    data::DataStore store;
    SessionConfig config{ts("2025-11-02T00:00:00Z"), ts("2025-11-06T00:00:00Z"), 1000.0, 20};

    Env() {
        market::MarketOptions o;
        o.baseline_symbol = "BTCUSDT";
        spec = market::load_market_spec(market::MarketId::crypto,
                                        arena::testing::fixture_dir("crypto30") / "universe.txt", o);
        store = arena::testing::fixture_store("crypto30");
    }
};

class LineClient {
public:
    explicit LineClient(std::uint16_t port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
        if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
            throw std::runtime_error("connect failed");
        }
    }
    ~LineClient() { close(); }

    void send(const std::string& line) {
        std::string data = line + "\n";
        ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
    }
    json read() {
        std::size_t nl;
        while ((nl = buffer_.find('\n')) == std::string::npos) {
            char chunk[4096];
            ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n <= 0) {
                throw std::runtime_error("connection closed");
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
        auto line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return json::parse(line);
    }
    json call(const json& request) {
        send(request.dump());
        return read();
    }
    void close() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_ = -1;
    std::string buffer_;
};

json req(std::int64_t id, const std::string& session, const std::string& method, json params = json::object()) {
    return {{"id", id}, {"session", session}, {"method", method}, {"params", std::move(params)}};
}

}  // namespace

TEST(ToolServer, GarbageLinesGetIdZero) {
    Env env;
    ToolServer server(env.spec, env.store);
    auto r = json::parse(server.handle_line("this is not json"));
    EXPECT_EQ(r["id"], 0);
    EXPECT_EQ(r["error"]["code"], codes::invalid_request);
    r = json::parse(server.handle_line(R"({"id":3,"session":"s-9","method":"observe","params":{}})"));
    EXPECT_EQ(r["id"], 3);
    EXPECT_EQ(r["error"]["code"], codes::session_not_found);
    r = json::parse(server.handle_line(R"({"id":4,"method":"observe"})"));
    EXPECT_EQ(r["error"]["code"], codes::invalid_request);
    r = json::parse(server.handle_line(R"([1,2,3])"));
    EXPECT_EQ(r["id"], 0);
}

TEST(ToolServer, StdioSession) {
    Env env;
    ToolServer server(env.spec, env.store);
    std::istringstream in(
        R"({"id":1,"session":"s-1","method":"observe","params":{}})" "\n"
        "\n"
        "garbage\n"
        R"({"id":2,"session":"s-1","method":"trade","params":{"action":"buy","symbol":"ETHUSDT","qty":0.1},"reasoning":"small probe"})" "\n"
        R"({"id":3,"session":"s-2","method":"observe","params":{}})" "\n"
        R"({"id":4,"session":"s-1","method":"stop","params":{}})" "\n");
    std::ostringstream out;
    agent::SessionResult got;
    serve_stream(server, env.config, in, out, [&](const std::string& token, const agent::SessionResult& r) {
        EXPECT_EQ(token, "s-1");
        got = r;
    });
    std::istringstream lines(out.str());
    std::vector<json> responses;
    for (std::string l; std::getline(lines, l);) {
        responses.push_back(json::parse(l));
    }
    ASSERT_EQ(responses.size(), 6u);
    EXPECT_EQ(responses[0]["hello"]["session"], "s-1");
    EXPECT_EQ(responses[0]["hello"]["decisions"], 5);
    EXPECT_EQ(responses[1]["result"]["clock"], "2025-11-02T00:00:00Z");
    EXPECT_EQ(responses[2]["id"], 0);
    EXPECT_TRUE(responses[3]["result"].contains("fill"));
    EXPECT_EQ(responses[4]["error"]["code"], codes::session_not_found);
    EXPECT_EQ(responses[5]["result"]["done"], false);
    ASSERT_EQ(got.records.size(), 1u);
    EXPECT_EQ(got.records[0].reasoning, std::vector<std::string>{"small probe"});
    EXPECT_EQ(got.records[0].fills.size(), 1u);
}

TEST(TcpServer, TwoConcurrentClientsAreIsolated) {
    Env env;
    ToolServer server(env.spec, env.store);
    TcpServer tcp(server, env.config, 0);
    ASSERT_NE(tcp.port(), 0);
    std::mutex m;
    std::map<std::string, agent::SessionResult> ended;
    std::thread loop([&] {
        tcp.run(
            [&](const std::string& token, const agent::SessionResult& r) {
                std::lock_guard lock(m);
                ended[token] = r;
            },
            2);
    });

    auto drive = [&](const std::string& symbol, double qty) {
        LineClient c(tcp.port());
        auto hello = c.read();
        const std::string token = hello["hello"]["session"];
        EXPECT_FALSE(c.call(req(1, token, "observe")).contains("error"));
        c.send("{{{ not json");
        EXPECT_EQ(c.read()["id"], 0);
        auto fill = c.call(req(2, token, "trade", {{"action", "buy"}, {"symbol", symbol}, {"qty", qty}}));
        EXPECT_TRUE(fill["result"].contains("fill")) << fill.dump();
        auto stop = c.call(req(3, token, "stop"));
        EXPECT_EQ(stop["result"]["next_clock"], "2025-11-03T00:00:00Z");
        c.close();
        return token;
    };
    std::string t1, t2;
    std::thread a([&] { t1 = drive("BTCUSDT", 0.001); });
    std::thread b([&] { t2 = drive("ETHUSDT", 0.01); });
    a.join();
    b.join();
    loop.join();

    ASSERT_EQ(ended.size(), 2u);
    EXPECT_NE(t1, t2);
    const auto& r1 = ended.at(t1);
    const auto& r2 = ended.at(t2);
    ASSERT_EQ(r1.records.size(), 1u);
    ASSERT_EQ(r2.records.size(), 1u);
    EXPECT_EQ(r1.records[0].fills[0].order.symbol, "BTCUSDT");
    EXPECT_EQ(r2.records[0].fills[0].order.symbol, "ETHUSDT");
    EXPECT_EQ(r1.records[0].end_positions.holdings.count("ETHUSDT"), 0u);
    EXPECT_EQ(r2.records[0].end_positions.holdings.count("BTCUSDT"), 0u);
}

TEST(TcpServer, ForeignSessionTokenIsRefused) {
    Env env;
    ToolServer server(env.spec, env.store);
    TcpServer tcp(server, env.config, 0);
    std::thread loop([&] { tcp.run({}, 2); });
    LineClient a(tcp.port());
    LineClient b(tcp.port());
    const std::string ta = a.read()["hello"]["session"];
    const std::string tb = b.read()["hello"]["session"];
    auto r = b.call(req(1, ta, "observe"));
    EXPECT_EQ(r["error"]["code"], codes::session_not_found);
    EXPECT_FALSE(b.call(req(2, tb, "observe")).contains("error"));
    a.close();
    b.close();
    loop.join();
}

TEST(TcpServer, PortInUse) {
    Env env;
    ToolServer server(env.spec, env.store);
    TcpServer first(server, env.config, 0);
    try {
        TcpServer second(server, env.config, first.port());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::port_in_use);
    }
}

TEST(TcpServer, StopUnblocksIdleClients) {
    Env env;
    ToolServer server(env.spec, env.store);
    TcpServer tcp(server, env.config, 0);
    std::thread loop([&] { tcp.run({}); });
    LineClient idle(tcp.port());
    idle.read();
    tcp.stop();
    loop.join();  // must not hang on the idle connection
    SUCCEED();
}
