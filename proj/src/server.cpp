#include "gcs/server.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <condition_variable>
#include <deque>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include "gcs/net.hpp"

namespace gcs {

void validate(const ServerConfig& config)
{
    if (!is_dotted_quad(config.bind_ip)) throw ConfigError("bind ip must be a dotted quad: " + config.bind_ip);
    if (config.heartbeat_interval <= std::chrono::seconds::zero())
        throw ConfigError("heartbeat interval must be positive");
    if (config.heartbeat_misses < 1) throw ConfigError("heartbeat misses must be at least 1");
}

std::string_view to_string(BindCause cause)
{
    switch (cause) {
    case BindCause::port_in_use: return "port in use";
    case BindCause::permission_denied: return "permission denied";
    case BindCause::address_unavailable: return "address unavailable";
    case BindCause::other: break;
    }
    return "bind failed";
}

BindError::BindError(std::string endpoint, BindCause cause, const std::string& detail)
    : std::runtime_error("cannot bind " + endpoint + ": " + std::string(to_string(cause)) +
                         (detail.empty() ? "" : " (" + detail + ")")),
      endpoint_(std::move(endpoint)),
      cause_(cause)
{
}

namespace {

// One live server per process.
std::mutex g_instance_mu;
std::optional<std::pair<std::string, std::uint16_t>> g_instance;

BindCause classify(int err)
{
    switch (err) {
    case EADDRINUSE: return BindCause::port_in_use;
    case EACCES:
    case EPERM: return BindCause::permission_denied;
    case EADDRNOTAVAIL: return BindCause::address_unavailable;
    default: return BindCause::other;
    }
}

std::string endpoint_text(const std::string& ip, std::uint16_t port) { return ip + ":" + std::to_string(port); }

net::Socket bind_listener(const std::string& ip, std::uint16_t& port)
{
    const auto where = endpoint_text(ip, port);
    net::Socket sock(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!sock.valid()) throw BindError(where, BindCause::other, std::strerror(errno));
    int one = 1;
    ::setsockopt(sock.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, ip.c_str(), &addr.sin_addr);
    if (::bind(sock.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(sock.fd(), 64) != 0) {
        int err = errno;
        throw BindError(where, classify(err), std::strerror(err));
    }
    socklen_t len = sizeof addr;
    ::getsockname(sock.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    port = ntohs(addr.sin_port);
    return sock;
}

// A connection's server-side handler: owns the socket and a reader thread
// that feeds lines to the sequencer.
struct SessionHandler {
    ConnId conn;
    net::Socket sock;
    std::thread reader;
};

struct Event {
    enum class Kind { opened, line, closed, sweep, stop } kind;
    ConnId conn = 0;
    std::string text;  // the line, or the peer ip for `opened`
    std::uint16_t port = 0;
};

}  // namespace

struct Server::Impl {
    ServerConfig config;
    std::shared_ptr<LogSink> sink;
    RoutingCore core;
    net::Socket listener;
    std::string ip;
    std::uint16_t port = 0;

    std::mutex queue_mu;
    std::condition_variable queue_cv;
    std::deque<Event> queue;

    std::mutex handlers_mu;
    std::map<ConnId, std::shared_ptr<SessionHandler>> handlers;
    ConnId next_conn = 1;

    mutable std::mutex snapshot_mu;
    Registry registry_snapshot;
    std::size_t sessions_snapshot = 0;

    std::mutex stop_mu;
    std::condition_variable stop_cv;
    bool stopping = false;
    bool stopped = false;

    std::thread acceptor, sequencer, sweeper;

    Impl(ServerConfig cfg, std::shared_ptr<LogSink> s, Clock clock)
        : config(std::move(cfg)),
          sink(std::move(s)),
          core(HeartbeatPolicy{config.heartbeat_interval, config.heartbeat_misses}, *sink, std::move(clock))
    {
    }

    void post(Event ev)
    {
        {
            std::lock_guard lock(queue_mu);
            queue.push_back(std::move(ev));
        }
        queue_cv.notify_one();
    }

    bool is_stopping()
    {
        std::lock_guard lock(stop_mu);
        return stopping;
    }

    // The handler factory: one handler per accepted connection.
    void create_handler(net::Socket sock)
    {
        auto [peer_ip, peer_port] = net::peer_address(sock.fd());
        timeval send_timeout{5, 0};  // a wedged peer must not stall routing forever
        ::setsockopt(sock.fd(), SOL_SOCKET, SO_SNDTIMEO, &send_timeout, sizeof send_timeout);

        auto handler = std::make_shared<SessionHandler>();
        handler->sock = std::move(sock);
        // Holding the table lock until the reader exists keeps the sequencer
        // from touching the handler half-built; `opened` is queued before any
        // line the reader can produce.
        std::lock_guard lock(handlers_mu);
        handler->conn = next_conn++;
        post({Event::Kind::opened, handler->conn, peer_ip, peer_port});
        handler->reader = std::thread([this, conn = handler->conn, fd = handler->sock.fd()] { read_loop(conn, fd); });
        handlers.emplace(handler->conn, std::move(handler));
    }

    void read_loop(ConnId conn, int fd)
    {
        net::LineBuffer buffer;
        for (;;) {
            auto result = net::read_some(fd, buffer, std::chrono::milliseconds(-1));
            while (auto line = buffer.next_line()) post({Event::Kind::line, conn, std::move(*line)});
            if (result == net::ReadResult::closed || buffer.overflowed()) break;
        }
        post({Event::Kind::closed, conn, {}, 0});
    }

    void accept_loop()
    {
        for (;;) {
            int fd = ::accept4(listener.fd(), nullptr, nullptr, SOCK_CLOEXEC);
            if (is_stopping()) {
                if (fd >= 0) ::close(fd);
                return;
            }
            if (fd < 0) {
                if (errno == EINTR || errno == ECONNABORTED) continue;
                if (errno == EMFILE || errno == ENFILE || errno == ENOBUFS || errno == ENOMEM) {
                    std::this_thread::sleep_for(std::chrono::milliseconds(50));
                    continue;
                }
                return;
            }
            create_handler(net::Socket(fd));
        }
    }

    std::shared_ptr<SessionHandler> find_handler(ConnId conn)
    {
        std::lock_guard lock(handlers_mu);
        auto it = handlers.find(conn);
        return it == handlers.end() ? nullptr : it->second;
    }

    void deliver(const Outbox& out)
    {
        for (const auto& [conn, frame] : out.frames) {
            auto handler = find_handler(conn);
            if (handler && !net::send_all(handler->sock.fd(), encode_frame(frame))) handler->sock.shutdown();
        }
        for (ConnId conn : out.closes)
            if (auto handler = find_handler(conn)) handler->sock.shutdown();
    }

    void retire_handler(ConnId conn)
    {
        std::shared_ptr<SessionHandler> handler;
        {
            std::lock_guard lock(handlers_mu);
            auto it = handlers.find(conn);
            if (it == handlers.end()) return;
            handler = std::move(it->second);
            handlers.erase(it);
        }
        if (handler->reader.joinable()) handler->reader.join();
    }

    void sequence_loop()
    {
        for (;;) {
            Event ev;
            {
                std::unique_lock lock(queue_mu);
                queue_cv.wait(lock, [this] { return !queue.empty(); });
                ev = std::move(queue.front());
                queue.pop_front();
            }
            Outbox out;
            switch (ev.kind) {
            case Event::Kind::opened: core.open_session(ev.conn, std::move(ev.text), ev.port); break;
            case Event::Kind::line: out = core.on_line(ev.conn, ev.text); break;
            case Event::Kind::closed: out = core.on_transport_closed(ev.conn, LeaveReason::error); break;
            case Event::Kind::sweep: out = core.sweep(); break;
            case Event::Kind::stop: return;
            }
            {
                std::lock_guard lock(snapshot_mu);
                registry_snapshot = core.registry();
                sessions_snapshot = core.session_count();
            }
            deliver(out);
            if (ev.kind == Event::Kind::closed) retire_handler(ev.conn);
        }
    }

    void sweep_loop()
    {
        std::unique_lock lock(stop_mu);
        for (;;) {
            if (stop_cv.wait_for(lock, config.heartbeat_interval, [this] { return stopping; })) return;
            post({Event::Kind::sweep, 0, {}, 0});
        }
    }

    void stop()
    {
        {
            std::lock_guard lock(stop_mu);
            if (stopped) return;
            stopped = stopping = true;
        }
        stop_cv.notify_all();
        listener.shutdown();
        if (acceptor.joinable()) acceptor.join();
        post({Event::Kind::stop, 0, {}, 0});
        if (sequencer.joinable()) sequencer.join();
        if (sweeper.joinable()) sweeper.join();

        std::map<ConnId, std::shared_ptr<SessionHandler>> remaining;
        {
            std::lock_guard lock(handlers_mu);
            remaining.swap(handlers);
        }
        for (auto& [conn, handler] : remaining) handler->sock.shutdown();
        for (auto& [conn, handler] : remaining)
            if (handler->reader.joinable()) handler->reader.join();
        listener.close();

        std::lock_guard lock(g_instance_mu);
        g_instance.reset();
    }
};

std::unique_ptr<Server> Server::start(const ServerConfig& config, std::shared_ptr<LogSink> sink, Clock clock)
{
    validate(config);

    std::lock_guard guard(g_instance_mu);
    if (g_instance) {
        const auto& [ip, port] = *g_instance;
        if (ip == config.bind_ip && port == config.bind_port)
            throw BindError(endpoint_text(ip, port), BindCause::port_in_use, "already served by this process");
        throw AlreadyRunning("a server is already running in this process on " + endpoint_text(ip, port));
    }

    std::uint16_t port = config.bind_port;
    auto listener = bind_listener(config.bind_ip, port);

    if (!sink) {
        if (config.log_path) sink = std::make_shared<FileLogSink>(*config.log_path);
        else sink = std::make_shared<StreamLogSink>(std::cout);
    }
    auto impl = std::make_unique<Impl>(config, std::move(sink), std::move(clock));
    impl->listener = std::move(listener);
    impl->ip = config.bind_ip;
    impl->port = port;
    impl->core.log(LogKind::bind, "endpoint=" + endpoint_text(impl->ip, port));

    auto* p = impl.get();
    p->sequencer = std::thread([p] { p->sequence_loop(); });
    p->sweeper = std::thread([p] { p->sweep_loop(); });
    p->acceptor = std::thread([p] { p->accept_loop(); });

    g_instance.emplace(impl->ip, port);
    return std::unique_ptr<Server>(new Server(std::move(impl)));
}

Server::Server(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

Server::~Server() { stop(); }

void Server::stop()
{
    if (impl_) impl_->stop();
}

const std::string& Server::ip() const noexcept { return impl_->ip; }
std::uint16_t Server::port() const noexcept { return impl_->port; }
std::string Server::endpoint() const { return endpoint_text(impl_->ip, impl_->port); }

Registry Server::registry() const
{
    std::lock_guard lock(impl_->snapshot_mu);
    return impl_->registry_snapshot;
}

std::size_t Server::connection_count() const
{
    std::lock_guard lock(impl_->snapshot_mu);
    return impl_->sessions_snapshot;
}

}  // namespace gcs
