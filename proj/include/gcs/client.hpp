#pragma once

// TCP side of the client: connect + handshake, and the terminal run loop.

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcs/client_core.hpp"
#include "gcs/net.hpp"

namespace gcs {

enum class ConnectFailure { connection_refused, unreachable, duplicate_id, handshake_timeout, protocol_error };
std::string_view to_string(ConnectFailure failure);

class ConnectError : public std::runtime_error {
public:
    ConnectError(ConnectFailure failure, const std::string& what) : std::runtime_error(what), failure_(failure) {}
    ConnectFailure failure() const noexcept { return failure_; }

private:
    ConnectFailure failure_;
};

inline constexpr std::chrono::milliseconds default_handshake_timeout{10'000};

class ClientConnection {
public:
    /// Connects, sends JOIN and waits for WELCOME. Throws ConnectError.
    static ClientConnection connect_and_join(const std::string& host, std::uint16_t port, const MemberId& id,
                                             std::chrono::milliseconds handshake_timeout = default_handshake_timeout);

    ClientState& state() noexcept { return state_; }
    const ClientState& state() const noexcept { return state_; }
    /// Events produced while joining (at least Joined).
    const std::vector<ClientEvent>& handshake_events() const noexcept { return handshake_events_; }

    bool send(const WireFrame& frame);
    int fd() const noexcept { return sock_.fd(); }
    /// Lines already read from the socket but not yet applied.
    net::LineBuffer& inbound() noexcept { return inbound_; }
    void close() noexcept { sock_.close(); }

private:
    ClientConnection() = default;

    net::Socket sock_;
    net::LineBuffer inbound_;
    ClientState state_;
    std::vector<ClientEvent> handshake_events_;
};

enum ExitCode : int { exit_graceful = 0, exit_connection_error = 1, exit_protocol_error = 2 };

/// Pumps `input_fd` lines into the session and renders server events to
/// `out` until the session ends. EOF on input is a graceful quit.
int run_session(ClientConnection& conn, int input_fd, std::ostream& out);

/// Connect, join and run; join failures are printed with their cause.
int run_client(const std::string& host, std::uint16_t port, const MemberId& id, int input_fd, std::ostream& out,
               std::ostream& err);

}  // namespace gcs
