#include "gcs/net.hpp"

#include <arpa/inet.h>
#include <cerrno>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>

namespace gcs::net {

void Socket::shutdown() noexcept
{
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::close() noexcept
{
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

bool send_all(int fd, std::string_view data)
{
    while (!data.empty()) {
        ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

void LineBuffer::feed(std::string_view bytes)
{
    while (!bytes.empty()) {
        auto nl = bytes.find('\n');
        if (nl == std::string_view::npos) {
            partial_.append(bytes);
            if (partial_.size() > max_line_) overflowed_ = true;
            return;
        }
        partial_.append(bytes.substr(0, nl));
        bytes.remove_prefix(nl + 1);
        if (!partial_.empty() && partial_.back() == '\r') partial_.pop_back();
        if (partial_.size() > max_line_) overflowed_ = true;
        lines_.push_back(std::exchange(partial_, {}));
    }
}

std::optional<std::string> LineBuffer::next_line()
{
    if (lines_.empty()) return std::nullopt;
    auto line = std::move(lines_.front());
    lines_.pop_front();
    return line;
}

std::string LineBuffer::take_partial() { return std::exchange(partial_, {}); }

ReadResult read_some(int fd, LineBuffer& buffer, std::chrono::milliseconds timeout)
{
    pollfd p{fd, POLLIN, 0};
    int ready;
    do {
        ready = ::poll(&p, 1, timeout.count() < 0 ? -1 : static_cast<int>(timeout.count()));
    } while (ready < 0 && errno == EINTR);
    if (ready == 0) return ReadResult::timeout;
    if (ready < 0) return ReadResult::closed;

    std::array<char, 4096> chunk;
    ssize_t n;
    do {
        n = ::recv(fd, chunk.data(), chunk.size(), 0);
    } while (n < 0 && errno == EINTR);
    if (n <= 0) return ReadResult::closed;
    buffer.feed(std::string_view(chunk.data(), static_cast<std::size_t>(n)));
    return ReadResult::data;
}

std::pair<std::string, std::uint16_t> peer_address(int fd)
{
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getpeername(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return {"0.0.0.0", 0};
    char text[INET_ADDRSTRLEN] = {};
    ::inet_ntop(AF_INET, &addr.sin_addr, text, sizeof text);
    return {text, ntohs(addr.sin_port)};
}

}  // namespace gcs::net
