#pragma once

// Live TCP server: acceptor, per-connection session handlers, one sequencer
// thread owning the RoutingCore, and a heartbeat timer.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "gcs/log.hpp"
#include "gcs/registry.hpp"
#include "gcs/server_core.hpp"

namespace gcs {

struct ServerConfig {
    std::string bind_ip = "127.0.0.1";
    std::uint16_t bind_port = 5000;  // 0 picks an ephemeral port
    std::chrono::seconds heartbeat_interval{5};
    unsigned heartbeat_misses = 2;
    std::optional<std::filesystem::path> log_path;
    std::optional<std::uint16_t> gateway_port;
};

class ConfigError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

void validate(const ServerConfig& config);

enum class BindCause { port_in_use, permission_denied, address_unavailable, other };
std::string_view to_string(BindCause cause);

class BindError : public std::runtime_error {
public:
    BindError(std::string endpoint, BindCause cause, const std::string& detail = {});
    const std::string& endpoint() const noexcept { return endpoint_; }
    BindCause cause() const noexcept { return cause_; }

private:
    std::string endpoint_;
    BindCause cause_;
};

/// A second server in the same process on a different endpoint.
class AlreadyRunning : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Server {
public:
    /// Binds, logs `BIND endpoint=ip:port`, and starts serving. When `sink`
    /// is null the config's log_path (or standard output) is used.
    static std::unique_ptr<Server> start(const ServerConfig& config, std::shared_ptr<LogSink> sink = nullptr,
                                         Clock clock = system_now);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Idempotent; closes every connection and joins all threads.
    void stop();

    const std::string& ip() const noexcept;
    std::uint16_t port() const noexcept;
    std::string endpoint() const;

    /// Copy of the registry as of the last processed event.
    Registry registry() const;
    std::size_t connection_count() const;

    struct Impl;

private:
    explicit Server(std::unique_ptr<Impl> impl);
    std::unique_ptr<Impl> impl_;
};

}  // namespace gcs
