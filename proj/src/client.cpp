#include "gcs/client.hpp"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <ostream>

#include "gcs/render.hpp"

namespace gcs {

std::string_view to_string(ConnectFailure failure)
{
    switch (failure) {
    case ConnectFailure::connection_refused: return "connection refused";
    case ConnectFailure::unreachable: return "server unreachable";
    case ConnectFailure::duplicate_id: return "duplicate id";
    case ConnectFailure::handshake_timeout: return "handshake timeout";
    case ConnectFailure::protocol_error: return "protocol error";
    }
    return "connect failed";
}

namespace {

net::Socket dial(const std::string& host, std::uint16_t port)
{
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    const auto where = host + ":" + std::to_string(port);
    if (int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &found); rc != 0)
        throw ConnectError(ConnectFailure::unreachable, "cannot resolve " + host + ": " + ::gai_strerror(rc));

    int last_err = ECONNREFUSED;
    net::Socket sock;
    for (auto* ai = found; ai; ai = ai->ai_next) {
        net::Socket candidate(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
        if (!candidate.valid()) {
            last_err = errno;
            continue;
        }
        if (::connect(candidate.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
            sock = std::move(candidate);
            break;
        }
        last_err = errno;
    }
    ::freeaddrinfo(found);
    if (sock.valid()) return sock;
    if (last_err == ECONNREFUSED)
        throw ConnectError(ConnectFailure::connection_refused, "connection refused by " + where);
    throw ConnectError(ConnectFailure::unreachable, "cannot reach " + where + ": " + std::strerror(last_err));
}

void render_all(std::ostream& out, const std::vector<ClientEvent>& events)
{
    for (const auto& ev : events)
        for (const auto& line : render_event(ev)) out << line << '\n';
    out.flush();
}

bool closed_with(const ClientState& state, std::string_view reason)
{
    const auto* c = std::get_if<client_phase::Closed>(&state.phase);
    return c && c->reason == reason;
}

}  // namespace

ClientConnection ClientConnection::connect_and_join(const std::string& host, std::uint16_t port, const MemberId& id,
                                                    std::chrono::milliseconds handshake_timeout)
{
    ClientConnection conn;
    conn.sock_ = dial(host, port);
    if (!conn.send(begin_join(conn.state_, id)))
        throw ConnectError(ConnectFailure::protocol_error, "connection lost while sending JOIN");

    const auto deadline = std::chrono::steady_clock::now() + handshake_timeout;
    for (;;) {
        while (auto line = conn.inbound_.next_line()) {
            auto outcome = apply_server_line(conn.state_, *line);
            for (const auto& ev : outcome.events) {
                if (const auto* err = std::get_if<event::Error>(&ev); err && !conn.state_.active()) {
                    if (err->code == "duplicate_id") throw ConnectError(ConnectFailure::duplicate_id, err->text);
                    throw ConnectError(ConnectFailure::protocol_error, err->code + ": " + err->text);
                }
            }
            if (outcome.auto_reply) conn.send(*outcome.auto_reply);
            conn.handshake_events_.insert(conn.handshake_events_.end(), outcome.events.begin(), outcome.events.end());
            if (conn.state_.active()) return conn;
        }
        auto left = std::chrono::ceil<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left <= std::chrono::milliseconds::zero())
            throw ConnectError(ConnectFailure::handshake_timeout,
                               "no WELCOME within " + std::to_string(handshake_timeout.count()) + " ms");
        switch (net::read_some(conn.fd(), conn.inbound_, left)) {
        case net::ReadResult::closed:
            throw ConnectError(ConnectFailure::protocol_error, "server closed the connection during the handshake");
        case net::ReadResult::timeout:
        case net::ReadResult::data: break;
        }
    }
}

bool ClientConnection::send(const WireFrame& frame) { return net::send_all(sock_.fd(), encode_frame(frame)); }

int run_session(ClientConnection& conn, int input_fd, std::ostream& out)
{
    render_all(out, conn.handshake_events());

    net::LineBuffer input;
    bool input_open = true;
    std::optional<std::chrono::steady_clock::time_point> quit_deadline;

    auto submit = [&](std::string_view text) {
        auto outcome = submit_input(conn.state(), text);
        render_all(out, outcome.events);
        if (outcome.frame) {
            conn.send(*outcome.frame);
            if (std::holds_alternative<frame::Quit>(*outcome.frame))
                quit_deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
        }
    };
    auto apply_lines = [&]() -> std::optional<int> {
        while (auto line = conn.inbound().next_line()) {
            auto outcome = apply_server_line(conn.state(), *line);
            render_all(out, outcome.events);
            if (outcome.auto_reply) conn.send(*outcome.auto_reply);
            if (closed_with(conn.state(), "protocol_error")) return exit_protocol_error;
        }
        return std::nullopt;
    };

    if (auto code = apply_lines()) return *code;

    for (;;) {
        std::array<pollfd, 2> fds{pollfd{conn.fd(), POLLIN, 0}, pollfd{input_fd, POLLIN, 0}};
        int timeout = -1;
        if (quit_deadline) {
            auto left = std::chrono::ceil<std::chrono::milliseconds>(*quit_deadline -
                                                                              std::chrono::steady_clock::now());
            if (left.count() <= 0) return exit_graceful;
            timeout = static_cast<int>(left.count());
        }
        const nfds_t count = (input_open && !quit_deadline) ? 2 : 1;
        int ready = ::poll(fds.data(), count, timeout);
        if (ready < 0) {
            if (errno == EINTR) continue;
            return exit_connection_error;
        }

        if (fds[0].revents) {
            auto result = net::read_some(conn.fd(), conn.inbound(), std::chrono::milliseconds(0));
            if (auto code = apply_lines()) return *code;
            if (result == net::ReadResult::closed) {
                if (closed_with(conn.state(), "quit")) return exit_graceful;
                render_all(out, on_connection_lost(conn.state(), "server_closed").events);
                return exit_connection_error;
            }
        }

        if (count == 2 && fds[1].revents) {
            std::array<char, 4096> chunk;
            ssize_t n = ::read(input_fd, chunk.data(), chunk.size());
            if (n < 0 && errno == EINTR) continue;
            if (n > 0) input.feed(std::string_view(chunk.data(), static_cast<std::size_t>(n)));
            while (!quit_deadline) {
                auto line = input.next_line();
                if (!line) break;
                submit(*line);
            }
            if (n <= 0) {
                input_open = false;
                if (auto rest = input.take_partial(); !rest.empty() && !quit_deadline) submit(rest);
                if (!quit_deadline && conn.state().active()) submit("/quit");
            }
        }
    }
}

int run_client(const std::string& host, std::uint16_t port, const MemberId& id, int input_fd, std::ostream& out,
               std::ostream& err)
{
    std::optional<ClientConnection> conn;
    try {
        conn.emplace(ClientConnection::connect_and_join(host, port, id));
    } catch (const ConnectError& e) {
        err << "join failed (" << to_string(e.failure()) << "): " << e.what() << '\n';
        return e.failure() == ConnectFailure::protocol_error ? exit_protocol_error : exit_connection_error;
    }
    return run_session(*conn, input_fd, out);
}

}  // namespace gcs
