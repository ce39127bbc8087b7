#include <doctest.h>

#include <algorithm>
#include <thread>

#include "gcs/server.hpp"
#include "support/peer.hpp"

using namespace gcs;
using namespace std::chrono_literals;
using testing::RawPeer;

namespace {

std::chrono::sys_seconds fixed_now() { return std::chrono::sys_seconds{std::chrono::seconds{1709287200}}; }

struct Running {
    std::shared_ptr<MemoryLogSink> log = std::make_shared<MemoryLogSink>();
    std::unique_ptr<Server> server;

    explicit Running(ServerConfig cfg = {})
    {
        cfg.bind_port = 0;
        server = Server::start(cfg, log, fixed_now);
    }
    std::uint16_t port() const { return server->port(); }

    bool logged(const std::string& needle, std::chrono::milliseconds timeout = 3s) const
    {
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        do {
            auto lines = log->lines();
            if (std::any_of(lines.begin(), lines.end(),
                            [&](const std::string& l) { return l.find(needle) != std::string::npos; }))
                return true;
            std::this_thread::sleep_for(10ms);
        } while (std::chrono::steady_clock::now() < deadline);
        return false;
    }
};

}  // namespace

TEST_CASE("start logs the bound endpoint; a second start on it is refused")
{
    Running r;
    const auto endpoint = "127.0.0.1:" + std::to_string(r.port());
    CHECK(r.server->endpoint() == endpoint);
    CHECK(r.logged("BIND endpoint=" + endpoint));

    ServerConfig again;
    again.bind_port = r.port();
    try {
        Server::start(again);
        FAIL("second start succeeded");
    } catch (const BindError& e) {
        CHECK(e.cause() == BindCause::port_in_use);
        CHECK(e.endpoint() == endpoint);
        CHECK(std::string(e.what()).find(endpoint) != std::string::npos);
    }

    ServerConfig elsewhere;
    elsewhere.bind_port = 0;
    CHECK_THROWS_AS(Server::start(elsewhere), AlreadyRunning);

    r.server->stop();
    // stopping releases both the port and the process guard
    auto next = Server::start(again, std::make_shared<MemoryLogSink>());
    CHECK(next->port() == r.port());
}

TEST_CASE("bind failures are classified and name the endpoint")
{
    SUBCASE("port held by another socket")
    {
        std::uint16_t port = 0;
        auto holder = testing::listen_loopback(port);
        ServerConfig cfg;
        cfg.bind_port = port;
        try {
            Server::start(cfg, std::make_shared<MemoryLogSink>());
            FAIL("bind on a held port succeeded");
        } catch (const BindError& e) {
            CHECK(e.cause() == BindCause::port_in_use);
            CHECK(e.endpoint() == "127.0.0.1:" + std::to_string(port));
        }
    }
    SUBCASE("address not local")
    {
        ServerConfig cfg;
        cfg.bind_ip = "192.0.2.1";
        cfg.bind_port = 0;
        try {
            Server::start(cfg, std::make_shared<MemoryLogSink>());
            FAIL("bind on a foreign address succeeded");
        } catch (const BindError& e) {
            CHECK(e.cause() == BindCause::address_unavailable);
            CHECK(e.endpoint() == "192.0.2.1:0");
        }
    }
}

TEST_CASE("config validation")
{
    ServerConfig cfg;
    cfg.bind_port = 0;
    cfg.heartbeat_interval = 0s;
    CHECK_THROWS_AS(Server::start(cfg), ConfigError);
    cfg.heartbeat_interval = 5s;
    cfg.heartbeat_misses = 0;
    CHECK_THROWS_AS(Server::start(cfg), ConfigError);
    cfg.heartbeat_misses = 2;
    cfg.bind_ip = "localhost";
    CHECK_THROWS_AS(Server::start(cfg), ConfigError);
}

TEST_CASE("live session: join, broadcast, private, details, quit")
{
    Running r;
    RawPeer alice(r.port()), bob(r.port());
    alice.send_line("JOIN alice");
    CHECK(alice.expect("WELCOME alice alice"));
    CHECK(alice.expect("COORD alice"));
    bob.send_line("JOIN bob");
    CHECK(bob.expect("WELCOME bob alice"));
    CHECK(alice.read_line()->rfind("JOINED bob 127.0.0.1 ", 0) == 0);

    alice.send_line("MSG hello there");
    CHECK(alice.expect("BCAST 2024-03-01 10:00:00 alice hello there"));
    CHECK(bob.expect("BCAST 2024-03-01 10:00:00 alice hello there"));

    bob.send_line("PRIV alice psst");
    CHECK(alice.expect("PRIVMSG 2024-03-01 10:00:00 bob psst"));

    bob.send_line("PRIV bob /memberdetails");
    CHECK(bob.expect("ERR not_coordinator bob is not the coordinator; alice is"));
    bob.send_line("PRIV alice /memberdetails");
    auto members = bob.read_line();
    REQUIRE(members);
    CHECK(members->rfind("MEMBERS alice,127.0.0.1,", 0) == 0);
    CHECK(members->find(";bob,127.0.0.1,") != std::string::npos);

    bob.send_line("QUIT");
    CHECK(bob.at_eof());
    CHECK(alice.expect("LEFT bob quit"));
    CHECK(r.logged("LEAVE id=bob reason=quit"));
    CHECK(r.server->registry().size() == 1);
}

TEST_CASE("crlf input and unjoined traffic")
{
    Running r;
    RawPeer p(r.port());
    p.send_line("MSG too early");
    CHECK(p.expect("ERR not_joined send JOIN <id> first"));
    net::send_all(p.fd(), "JOIN carol\r\n");
    CHECK(p.expect("WELCOME carol carol"));
}

TEST_CASE("repeated bad frames disconnect the peer")
{
    Running r;
    RawPeer p(r.port());
    p.send_line("JOIN dave");
    CHECK(p.expect("COORD dave"));
    for (int i = 0; i <= max_bad_frames; ++i) p.send_line("NONSENSE " + std::to_string(i));
    CHECK(p.at_eof());
    CHECK(r.logged("LEAVE id=dave reason=error"));
}

TEST_CASE("abrupt disconnect of the coordinator hands over")
{
    Running r;
    RawPeer a(r.port()), b(r.port()), c(r.port());
    a.send_line("JOIN a");
    CHECK(a.expect("COORD a"));
    b.send_line("JOIN b");
    CHECK(b.expect("WELCOME b a"));
    c.send_line("JOIN c");
    CHECK(c.expect("WELCOME c a"));
    a.close();
    for (auto* p : {&b, &c}) {
        CHECK(p->expect("LEFT a error"));
        CHECK(p->expect("COORD b"));
    }
    CHECK(r.logged("COORD_CHANGE id=b"));
}

TEST_CASE("silent client is removed by the heartbeat")
{
    ServerConfig cfg;
    cfg.heartbeat_interval = 1s;
    cfg.heartbeat_misses = 1;
    Running r(cfg);
    RawPeer live(r.port()), silent(r.port());
    silent.answer_pings = false;
    live.send_line("JOIN live");
    CHECK(live.expect("COORD live"));
    silent.send_line("JOIN silent");
    CHECK(silent.expect("WELCOME silent live"));

    const auto t0 = std::chrono::steady_clock::now();
    CHECK(live.expect("LEFT silent timeout", 5s));
    // (misses + 1) intervals, plus scheduling slack
    CHECK(std::chrono::steady_clock::now() - t0 <= 3500ms);
    CHECK(silent.at_eof());
    CHECK(r.logged("PING_TIMEOUT id=silent missed=2"));
    CHECK(r.server->registry().contains(MemberId("live")));
}

TEST_CASE("sixteen concurrent connections all join")
{
    Running r;
    std::vector<std::thread> threads;
    std::vector<int> ok(16, 0);
    std::vector<std::unique_ptr<RawPeer>> peers(16);
    for (int i = 0; i < 16; ++i)
        threads.emplace_back([&, i] {
            peers[i] = std::make_unique<RawPeer>(r.port());
            peers[i]->send_line("JOIN m" + std::to_string(i));
            auto line = peers[i]->read_line();
            ok[i] = line && line->rfind("WELCOME m" + std::to_string(i) + " ", 0) == 0;
        });
    for (auto& t : threads) t.join();
    CHECK(std::count(ok.begin(), ok.end(), 1) == 16);
    for (int tries = 0; tries < 100 && r.server->registry().size() != 16; ++tries) std::this_thread::sleep_for(10ms);
    CHECK(r.server->registry().size() == 16);
    CHECK(r.server->connection_count() == 16);
}

TEST_CASE("stop closes live connections")
{
    Running r;
    RawPeer p(r.port());
    p.send_line("JOIN eve");
    CHECK(p.expect("COORD eve"));
    r.server->stop();
    CHECK(p.at_eof());
    r.server->stop();  // idempotent
}
