#pragma once

// Thin POSIX socket helpers.

#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>

namespace gcs::net {

class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) noexcept : fd_(fd) {}
    ~Socket() { close(); }

    Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    Socket& operator=(Socket&& other) noexcept
    {
        if (this != &other) {
            close();
            fd_ = std::exchange(other.fd_, -1);
        }
        return *this;
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    int fd() const noexcept { return fd_; }
    bool valid() const noexcept { return fd_ >= 0; }

    /// Unblocks any reader; the descriptor stays open until close().
    void shutdown() noexcept;
    void close() noexcept;

private:
    int fd_ = -1;
};

/// Writes all of `data`; false if the peer went away.
bool send_all(int fd, std::string_view data);

/// Splits a byte stream into '\n'-terminated lines. A trailing '\r' is
/// dropped so CRLF peers (telnet, netcat -C) work.
class LineBuffer {
public:
    static constexpr std::size_t default_max_line = 64 * 1024;

    explicit LineBuffer(std::size_t max_line = default_max_line) : max_line_(max_line) {}

    void feed(std::string_view bytes);
    std::optional<std::string> next_line();
    /// Whatever follows the last newline; used for input that ends without one.
    std::string take_partial();
    /// A line grew past the limit without a terminator.
    bool overflowed() const noexcept { return overflowed_; }

private:
    std::size_t max_line_;
    std::string partial_;
    std::deque<std::string> lines_;
    bool overflowed_ = false;
};

enum class ReadResult { data, closed, timeout };

/// One recv() into `buffer`, waiting at most `timeout` (negative: forever).
ReadResult read_some(int fd, LineBuffer& buffer, std::chrono::milliseconds timeout);

/// "ip:port" of the remote end of a connected socket.
std::pair<std::string, std::uint16_t> peer_address(int fd);

}  // namespace gcs::net
