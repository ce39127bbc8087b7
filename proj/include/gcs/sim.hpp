#pragma once

// Deterministic in-memory network for driving RoutingCore and ClientState
// machines through scripted scenarios.
//
// Every connection has two FIFO channels (client->server and server->client).
// `step` delivers one frame: by default the oldest pending frame network-wide;
// with a shuffle seed, the head of a randomly chosen non-empty channel, which
// reorders traffic across channels but never within one. Time only moves via
// `advance_time`, which also fires the heartbeat sweeps.

#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gcs/client_core.hpp"
#include "gcs/log.hpp"
#include "gcs/server_core.hpp"

namespace gcs {

struct SimConfig {
    HeartbeatPolicy heartbeat{};
    std::chrono::sys_seconds start{std::chrono::seconds{1709287200}};  // 2024-03-01 10:00:00 UTC
    std::optional<std::uint64_t> shuffle_seed;
};

enum class Direction { to_server, to_client };

struct TranscriptRecord {
    std::chrono::sys_seconds time;
    Direction direction;
    std::string endpoint;  // client handle
    std::optional<WireFrame> frame;  // empty for end-of-stream
    std::string line;                // raw line, "<eof>" for end-of-stream
};

struct SimClient {
    std::string handle;
    MemberId wire_id;
    ConnId conn = 0;
    std::string ip;
    std::uint16_t port = 0;
    ClientState state;
    std::vector<ClientEvent> events;
    std::vector<WireFrame> received;
    bool muted = false;       // stops answering PINGs
    bool connected = true;    // transport still open
};

class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SimNetwork {
public:
    explicit SimNetwork(SimConfig config = {});
    SimNetwork(const SimNetwork&) = delete;
    SimNetwork& operator=(const SimNetwork&) = delete;

    /// Opens a connection (the server side goes through the handler factory)
    /// and queues JOIN(wire_id), where wire_id defaults to the handle.
    SimClient& connect_client(const std::string& handle, std::optional<MemberId> wire_id = std::nullopt);

    /// Opens a connection without joining.
    SimClient& open_connection(const std::string& handle, const MemberId& wire_id);

    /// Feeds a line of user input to the client's state machine.
    InputOutcome submit(const std::string& handle, std::string_view text);

    /// Queues a raw line from the client, bypassing its state machine.
    void send_raw(const std::string& handle, std::string line);

    std::optional<TranscriptRecord> step();
    std::size_t run_until_quiet(std::size_t max_steps = 1'000'000);

    /// Moves virtual time forward by `dt`, firing one sweep per crossed
    /// heartbeat boundary; the network is run to quiescence after each sweep.
    void advance_time(std::chrono::seconds dt);

    /// Severs a connection without QUIT; the server sees a reset immediately.
    void drop_connection(const std::string& handle);

    void mute(const std::string& handle, bool muted = true);

    const SimClient& client(const std::string& handle) const;
    bool has_client(const std::string& handle) const { return clients_.count(handle) != 0; }
    std::vector<std::string> handles() const;

    const RoutingCore& core() const noexcept { return core_; }
    const std::vector<TranscriptRecord>& transcript() const noexcept { return transcript_; }
    std::vector<std::string> log_lines() const { return log_.lines(); }
    std::vector<LogEntry> log_entries() const { return log_.entries(); }

    std::chrono::sys_seconds now() const noexcept { return now_; }
    std::size_t sweep_count() const noexcept { return sweeps_; }
    std::size_t pending() const noexcept;

    /// Transcript rendered one record per line; stable across identical runs.
    std::string transcript_text() const;
    std::uint64_t transcript_hash() const;

private:
    struct Pending {
        std::uint64_t seq;
        std::optional<std::string> line;  // empty = end-of-stream
    };
    using ChannelKey = std::pair<ConnId, Direction>;

    SimClient& client_mut(const std::string& handle);
    void enqueue(ConnId conn, Direction dir, std::optional<std::string> line);
    void route(Outbox&& out);
    void deliver(const ChannelKey& key, Pending pending);

    SimConfig config_;
    std::chrono::sys_seconds now_;
    std::chrono::sys_seconds next_sweep_;
    std::size_t sweeps_ = 0;
    MemoryLogSink log_;
    RoutingCore core_;
    std::map<std::string, SimClient> clients_;
    std::map<ConnId, std::string> handle_of_;
    std::map<ChannelKey, std::deque<Pending>> channels_;
    std::uint64_t next_seq_ = 0;
    ConnId next_conn_ = 1;
    std::optional<std::mt19937_64> rng_;
    std::vector<TranscriptRecord> transcript_;
};

}  // namespace gcs
