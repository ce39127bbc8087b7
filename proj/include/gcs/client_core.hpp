#pragma once

// Client-side session state machine. It knows nothing about sockets: callers
// feed it server frames and user input and forward whatever frames it returns.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gcs/protocol.hpp"

namespace gcs {

namespace client_phase {
struct Connecting { friend bool operator==(const Connecting&, const Connecting&) = default; };
struct Joining {
    MemberId proposed_id;
    friend bool operator==(const Joining&, const Joining&) = default;
};
struct Active {
    MemberId own_id;
    MemberId coordinator;
    friend bool operator==(const Active&, const Active&) = default;
};
struct Closed {
    std::string reason;
    friend bool operator==(const Closed&, const Closed&) = default;
};
}  // namespace client_phase

using ClientPhase = std::variant<client_phase::Connecting, client_phase::Joining,
                                 client_phase::Active, client_phase::Closed>;

struct ClientState {
    ClientPhase phase = client_phase::Connecting{};
    std::optional<std::vector<MemberEntry>> roster;

    bool active() const noexcept { return std::holds_alternative<client_phase::Active>(phase); }
    bool closed() const noexcept { return std::holds_alternative<client_phase::Closed>(phase); }
    /// Coordinator as last announced by WELCOME or COORD.
    std::optional<MemberId> coordinator() const;

    friend bool operator==(const ClientState&, const ClientState&) = default;
};

enum class MessageKind { public_message, private_message };

namespace event {
struct Joined {
    MemberId self;
    MemberId coordinator;
    friend bool operator==(const Joined&, const Joined&) = default;
};
struct PeerJoined {
    MemberId id;
    std::string ip;
    std::uint16_t port = 0;
    friend bool operator==(const PeerJoined&, const PeerJoined&) = default;
};
struct PeerLeft {
    MemberId id;
    LeaveReason reason;
    friend bool operator==(const PeerLeft&, const PeerLeft&) = default;
};
struct NewCoordinator {
    MemberId id;
    friend bool operator==(const NewCoordinator&, const NewCoordinator&) = default;
};
struct Message {
    Timestamp ts;
    MemberId from;
    std::string body;
    MessageKind kind;
    friend bool operator==(const Message&, const Message&) = default;
};
struct Roster {
    std::vector<MemberEntry> entries;
    friend bool operator==(const Roster&, const Roster&) = default;
};
/// `code` is a wire error code (duplicate_id, ...) or a local input error
/// (empty_input, bad_target, ...).
struct Error {
    std::string code;
    std::string text;
    friend bool operator==(const Error&, const Error&) = default;
};
struct Disconnected {
    std::string reason;
    friend bool operator==(const Disconnected&, const Disconnected&) = default;
};
}  // namespace event

using ClientEvent = std::variant<event::Joined, event::PeerJoined, event::PeerLeft,
                                 event::NewCoordinator, event::Message, event::Roster,
                                 event::Error, event::Disconnected>;

/// Marks the start of the handshake: phase becomes joining(id), and the JOIN
/// frame to send is returned.
WireFrame begin_join(ClientState& state, const MemberId& id);

struct InputOutcome {
    std::optional<WireFrame> frame;  // to send, if any
    std::vector<ClientEvent> events; // local feedback (input errors)
};

/// Translates one line of user input. Only an active session emits frames;
/// `/quit` emits QUIT and moves the session to closed("quit").
InputOutcome submit_input(ClientState& state, std::string_view text);

struct ApplyOutcome {
    std::vector<ClientEvent> events;
    std::optional<WireFrame> auto_reply;
};

ApplyOutcome apply_server_frame(ClientState& state, const WireFrame& frame);

/// Decodes and applies one raw server line. An undecodable line closes the
/// session with reason "protocol_error".
ApplyOutcome apply_server_line(ClientState& state, std::string_view line);

/// The transport reported EOF or an error.
ApplyOutcome on_connection_lost(ClientState& state, const std::string& reason);

}  // namespace gcs
