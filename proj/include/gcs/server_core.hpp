#pragma once

// Transport-free routing logic of the server.
//
// `handle_frame`, `on_disconnect` and `heartbeat_step` are pure: they take the
// session and registry by value and describe everything that should happen as
// an Effects value. `RoutingCore` is the single sequencer that owns the session
// table and registry and turns Effects into per-connection deliveries. Both the
// TCP server and the simulator drive the same RoutingCore.

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gcs/log.hpp"
#include "gcs/protocol.hpp"
#include "gcs/registry.hpp"

namespace gcs {

enum class SessionPhase { awaiting_join, joined, closed };

struct SessionState {
    SessionPhase phase = SessionPhase::awaiting_join;
    std::optional<MemberId> member;  // set while joined
    std::string peer_ip;
    std::uint16_t peer_port = 0;
    unsigned missed_pings = 0;
    std::optional<std::uint64_t> last_nonce;
    unsigned bad_frames = 0;  // consecutive malformed frames

    friend bool operator==(const SessionState&, const SessionState&) = default;
};

/// Fresh per-connection state, awaiting JOIN.
SessionState make_session(std::string peer_ip, std::uint16_t peer_port);

/// A session is disconnected after this many consecutive malformed frames.
inline constexpr unsigned max_bad_frames = 2;

struct ToOrigin {
    friend bool operator==(const ToOrigin&, const ToOrigin&) = default;
};
using Destination = std::variant<ToOrigin, MemberId>;

struct Outbound {
    Destination to;
    WireFrame frame;
};

struct Effects {
    std::vector<Outbound> outbound;
    Registry registry;
    std::vector<LogEntry> logs;
    std::optional<LeaveReason> close;
};

struct HandleResult {
    SessionState session;
    Effects effects;
};

HandleResult handle_frame(const SessionState& session, const WireFrame& frame,
                          const Registry& registry, const Timestamp& now);

/// Reply to a line that failed to decode.
HandleResult handle_bad_frame(const SessionState& session, const std::string& reason,
                              const Registry& registry, const Timestamp& now);

Effects on_disconnect(const SessionState& session, const Registry& registry, LeaveReason reason,
                      const Timestamp& now);

struct HeartbeatPolicy {
    std::chrono::seconds interval{5};
    unsigned misses = 2;
};

struct SweepAction {
    enum Verdict { idle, ping, condemn } verdict = idle;
    std::uint64_t nonce = 0;
};

/// One heartbeat tick for one session: bumps the miss counter, then either
/// condemns the session (counter above the tolerance) or issues a PING with
/// `fresh_nonce`. Sessions that are not joined are left alone.
SweepAction heartbeat_step(SessionState& session, const HeartbeatPolicy& policy,
                           std::uint64_t fresh_nonce);

using ConnId = std::uint64_t;

struct Outbox {
    std::vector<std::pair<ConnId, WireFrame>> frames;
    std::vector<ConnId> closes;  // processed after `frames`

    void append(Outbox&& other);
};

class RoutingCore {
public:
    RoutingCore(HeartbeatPolicy policy, LogSink& log, Clock clock);

    /// Registers a freshly accepted connection (the handler factory's hook).
    const SessionState& open_session(ConnId conn, std::string peer_ip, std::uint16_t peer_port);

    Outbox on_line(ConnId conn, std::string_view line);
    Outbox on_frame(ConnId conn, const WireFrame& frame);
    /// Transport saw EOF or a reset. Unknown or already closed ids are ignored.
    Outbox on_transport_closed(ConnId conn, LeaveReason reason = LeaveReason::error);
    Outbox sweep();

    void log(LogKind kind, std::string detail);

    const Registry& registry() const noexcept { return registry_; }
    const SessionState* session(ConnId conn) const;
    std::size_t session_count() const noexcept { return sessions_.size(); }
    const HeartbeatPolicy& policy() const noexcept { return policy_; }
    Timestamp now() const { return format_timestamp(clock_()); }

private:
    Outbox apply(ConnId origin, HandleResult result);
    void emit_logs(const std::vector<LogEntry>& logs);
    void rebuild_member_index();

    HeartbeatPolicy policy_;
    LogSink& log_;
    Clock clock_;
    Registry registry_;
    std::map<ConnId, SessionState> sessions_;
    std::map<MemberId, ConnId> by_member_;
    std::uint64_t next_nonce_ = 1;
};

}  // namespace gcs
