#include <doctest.h>

#include <map>
#include <set>

#include "gcs/sim.hpp"
#include "support/transcript.hpp"

using namespace gcs;
using namespace std::chrono_literals;
using testing::transcript_has;

TEST_CASE("connect_client")
{
    SimNetwork net;
    net.connect_client("alice");
    net.run_until_quiet();
    CHECK(transcript_has(net, "alice", Direction::to_server, "JOIN alice"));
    CHECK(transcript_has(net, "alice", Direction::to_client, "WELCOME alice alice"));
    CHECK(transcript_has(net, "alice", Direction::to_client, "COORD alice"));

    net.connect_client("bob");
    net.run_until_quiet();
    CHECK(transcript_has(net, "alice", Direction::to_client, "JOINED bob 127.0.0.1 40002"));

    net.connect_client("alice-again", MemberId("alice"));
    net.run_until_quiet();
    CHECK(transcript_has(net, "alice-again", Direction::to_client, "ERR duplicate_id id alice is already in use"));
    CHECK(transcript_has(net, "alice-again", Direction::to_client, "<eof>"));
    CHECK_FALSE(net.client("alice-again").connected);

    CHECK_THROWS_AS(net.connect_client("bob"), SimError);
}

TEST_CASE("sixteen simultaneous connections all join")
{
    SimNetwork net;
    for (int i = 0; i < 16; ++i) net.connect_client("c" + std::to_string(i));
    CHECK(net.core().session_count() == 16);
    net.run_until_quiet();
    CHECK(net.core().registry().size() == 16);
    for (const auto& h : net.handles()) {
        CHECK(net.client(h).state.active());
        CHECK(net.core().session(net.client(h).conn)->phase == SessionPhase::joined);
    }
}

TEST_CASE("step")
{
    SimNetwork net;
    CHECK_FALSE(net.step().has_value());

    net.connect_client("alice");
    CHECK(net.pending() == 1);
    auto rec = net.step();
    REQUIRE(rec.has_value());
    CHECK(rec->line == "JOIN alice");
    CHECK(rec->direction == Direction::to_server);

    net.run_until_quiet();
    net.connect_client("bob");
    net.connect_client("carol");
    net.run_until_quiet();
    auto before = net.transcript().size();
    net.submit("bob", "hello");
    net.run_until_quiet();
    std::size_t bcasts = 0;
    for (auto i = before; i < net.transcript().size(); ++i) {
        const auto& r = net.transcript()[i];
        if (r.frame && std::holds_alternative<frame::Bcast>(*r.frame)) ++bcasts;
    }
    CHECK(bcasts == 3);
}

TEST_CASE("advance_time counts sweeps")
{
    SimNetwork net;
    net.connect_client("alice");
    net.run_until_quiet();
    net.advance_time(0s);
    CHECK(net.sweep_count() == 0);
    net.advance_time(15s);
    CHECK(net.sweep_count() == 3);
    net.advance_time(4s);
    CHECK(net.sweep_count() == 3);
    net.advance_time(1s);
    CHECK(net.sweep_count() == 4);
    CHECK(net.client("alice").state.active());
    CHECK(net.core().session(net.client("alice").conn)->missed_pings == 0);
    CHECK_THROWS_AS(net.advance_time(-1s), SimError);
}

TEST_CASE("silent client times out within (misses + 1) intervals")
{
    SimNetwork net;
    net.connect_client("alice");
    net.connect_client("bob");
    net.run_until_quiet();
    net.advance_time(5s);  // one round of PING/PONG so bob has a last PONG
    auto last_pong = net.now();
    net.mute("bob");

    while (net.core().registry().contains(MemberId("bob"))) net.advance_time(1s);
    CHECK(net.now() - last_pong <= 15s);
    CHECK(transcript_has(net, "alice", Direction::to_client, "LEFT bob timeout"));
    auto lines = net.log_lines();
    CHECK(std::any_of(lines.begin(), lines.end(),
                      [](const std::string& l) { return l.find("PING_TIMEOUT id=bob missed=3") != std::string::npos; }));
}

TEST_CASE("drop_connection")
{
    SUBCASE("non-coordinator")
    {
        SimNetwork net;
        for (auto h : {"alice", "bob", "carol"}) net.connect_client(h);
        net.run_until_quiet();
        net.drop_connection("carol");
        net.run_until_quiet();
        CHECK(transcript_has(net, "alice", Direction::to_client, "LEFT carol error"));
        CHECK(testing::frames_of<frame::Coord>(net.client("bob")).size() == 0);
    }
    SUBCASE("coordinator")
    {
        SimNetwork net;
        for (auto h : {"alice", "bob", "carol"}) net.connect_client(h);
        net.run_until_quiet();
        net.drop_connection("alice");
        net.run_until_quiet();
        for (auto h : {"bob", "carol"}) {
            CHECK(transcript_has(net, h, Direction::to_client, "LEFT alice error"));
            CHECK(transcript_has(net, h, Direction::to_client, "COORD bob"));
        }
        CHECK(net.client("carol").state.coordinator() == MemberId("bob"));
    }
    SUBCASE("before joining")
    {
        SimNetwork net;
        net.connect_client("alice");
        net.run_until_quiet();
        auto before = net.client("alice").received.size();
        net.open_connection("lurker", MemberId("lurker"));
        net.drop_connection("lurker");
        net.run_until_quiet();
        CHECK(net.client("alice").received.size() == before);
        CHECK(net.log_lines().back().find("LEAVE peer=127.0.0.1:40002 reason=error") != std::string::npos);
    }
    SUBCASE("unknown or already dropped")
    {
        SimNetwork net;
        CHECK_THROWS_AS(net.drop_connection("ghost"), SimError);
        net.connect_client("alice");
        net.drop_connection("alice");
        CHECK_THROWS_AS(net.drop_connection("alice"), SimError);
    }
}

namespace {

void scripted(SimNetwork& net)
{
    for (auto h : {"alice", "bob", "carol", "dan"}) net.connect_client(h);
    net.run_until_quiet();
    net.submit("alice", "hello all");
    net.submit("bob", "@carol hi carol");
    net.submit("dan", "@alice /memberdetails");
    net.run_until_quiet();
    net.drop_connection("alice");
    net.submit("carol", "@bob /memberdetails");
    net.advance_time(12s);
    net.submit("dan", "/quit");
    net.run_until_quiet();
}

}  // namespace

TEST_CASE("identical scripts give identical transcripts")
{
    SimNetwork a, b;
    scripted(a);
    scripted(b);
    CHECK(a.transcript_hash() == b.transcript_hash());
    CHECK(a.transcript_text() == b.transcript_text());
    CHECK(a.log_lines() == b.log_lines());

    SimConfig shuffled;
    shuffled.shuffle_seed = 7;
    SimNetwork c(shuffled), d(shuffled);
    scripted(c);
    scripted(d);
    CHECK(c.transcript_hash() == d.transcript_hash());
}

TEST_CASE("shuffle mode keeps per-channel order")
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SimConfig cfg;
        cfg.shuffle_seed = seed;
        SimNetwork net(cfg);
        for (auto h : {"alice", "bob", "carol"}) net.connect_client(h);
        net.run_until_quiet();
        for (int i = 0; i < 10; ++i) {
            net.submit("alice", "a" + std::to_string(i));
            net.submit("bob", "b" + std::to_string(i));
        }
        net.run_until_quiet();

        std::map<std::string, std::vector<std::string>> seen;  // recipient -> bodies in arrival order
        for (const auto* r : testing::delivered_to_clients<frame::Bcast>(net))
            seen[r->endpoint].push_back(std::get<frame::Bcast>(*r->frame).body);
        // single sequencer: every recipient sees the same global order
        CHECK(seen["alice"] == seen["bob"]);
        CHECK(seen["alice"] == seen["carol"]);
        // per-sender order preserved
        for (const auto& [who, bodies] : seen) {
            int next_a = 0, next_b = 0;
            for (const auto& b : bodies) {
                if (b[0] == 'a') CHECK(b == "a" + std::to_string(next_a++));
                else CHECK(b == "b" + std::to_string(next_b++));
            }
            CHECK(next_a == 10);
            CHECK(next_b == 10);
        }
    }
}
