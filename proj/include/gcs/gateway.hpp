#pragma once

// WebSocket-to-TCP bridge for browser clients. Each WebSocket connection on
// `/ws` gets its own TCP connection to the chat server; one text message is
// exactly one protocol line (without the '\n') in either direction. Plain
// HTTP GETs are answered from the console asset directory.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace gcs {

struct GatewayConfig {
    std::string listen_ip = "127.0.0.1";
    std::uint16_t listen_port = 8080;  // 0 picks an ephemeral port
    std::string server_host = "127.0.0.1";
    std::uint16_t server_port = 5000;
    /// Directory holding index.html and friends; a built-in page is served
    /// for `/` when absent.
    std::optional<std::filesystem::path> assets_dir;
};

/// WebSocket close reasons sent to the browser.
inline constexpr const char* close_upstream_unreachable = "upstream_unreachable";
inline constexpr const char* close_upstream_closed = "upstream_closed";
inline constexpr const char* close_bad_message = "bad_message";

class Gateway {
public:
    /// Binds and starts serving on a background thread. Throws
    /// std::system_error if the listen endpoint cannot be bound.
    static std::unique_ptr<Gateway> start(const GatewayConfig& config);
    ~Gateway();

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    std::uint16_t port() const noexcept;
    /// Idempotent; drops every bridge and joins the worker thread.
    void stop();

    struct Impl;

private:
    explicit Gateway(std::unique_ptr<Impl> impl);
    std::unique_ptr<Impl> impl_;
};

/// Content-Type for a served asset, by extension.
std::string_view mime_type(const std::filesystem::path& path);

/// Maps a request target to a file under `root`; nullopt for anything that
/// escapes it.
std::optional<std::filesystem::path> asset_path(const std::filesystem::path& root, std::string_view target);

}  // namespace gcs
