#pragma once

// Random value generators shared by the unit and acceptance suites.

#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gcs/protocol.hpp"

namespace gcs::testing {

class FrameGen {
public:
    explicit FrameGen(std::uint64_t seed) : rng_(seed) {}

    std::size_t uniform(std::size_t lo, std::size_t hi)
    {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
    }

    MemberId id()
    {
        static constexpr std::string_view alphabet =
            "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_-";
        std::string s(uniform(1, MemberId::max_length), 'x');
        for (auto& c : s) c = alphabet[uniform(0, alphabet.size() - 1)];
        return MemberId(s);
    }

    std::string ip()
    {
        return std::to_string(uniform(0, 255)) + "." + std::to_string(uniform(0, 255)) + "." +
               std::to_string(uniform(0, 255)) + "." + std::to_string(uniform(0, 255));
    }

    std::uint16_t port() { return static_cast<std::uint16_t>(uniform(0, 65535)); }

    std::uint64_t nonce()
    {
        switch (uniform(0, 2)) {
        case 0: return uniform(0, 10);
        case 1: return std::numeric_limits<std::uint64_t>::max();
        default: return std::uniform_int_distribution<std::uint64_t>()(rng_);
        }
    }

    /// Non-empty body: ASCII with spaces (leading, trailing, repeated),
    /// punctuation that looks like grammar, and multi-byte UTF-8.
    std::string body()
    {
        static const std::vector<std::string> pieces = {
            "a", "Z", "9", " ", "  ", "@", "/", ",", ";", "=", "hello", "/memberdetails",
            "\xC3\xA9", "\xE2\x82\xAC", "\xF0\x9F\x98\x80", "\t", "MSG", "PRIV bob x"};
        std::string s;
        auto n = uniform(1, 12);
        for (std::size_t i = 0; i < n; ++i) s += pieces[uniform(0, pieces.size() - 1)];
        return s;
    }

    Timestamp timestamp()
    {
        auto secs = static_cast<std::int64_t>(uniform(0, 253402300799ULL));  // through 9999-12-31
        return format_timestamp(std::chrono::sys_seconds{std::chrono::seconds{secs}});
    }

    WireFrame frame()
    {
        switch (uniform(0, std::variant_size_v<WireFrame> - 1)) {
        case 0: return frame::Join{id()};
        case 1: return frame::Msg{body()};
        case 2: return frame::Priv{id(), body()};
        case 3: return frame::Quit{};
        case 4: return frame::Pong{nonce()};
        case 5: return frame::Welcome{id(), id()};
        case 6: return frame::Joined{id(), ip(), port()};
        case 7: return frame::Left{id(), static_cast<LeaveReason>(uniform(0, 2))};
        case 8: return frame::Coord{id()};
        case 9: return frame::Bcast{timestamp(), id(), body()};
        case 10: return frame::PrivMsg{timestamp(), id(), body()};
        case 11: {
            frame::Members m;
            auto n = uniform(0, 6);
            for (std::size_t i = 0; i < n; ++i) m.entries.push_back({id(), ip(), port()});
            return m;
        }
        case 12: return frame::Err{static_cast<ErrorCode>(uniform(0, 4)), uniform(0, 3) == 0 ? "" : body()};
        default: return frame::Ping{nonce()};
        }
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

/// Lines the decoder must reject, with the reason it must give.
struct MalformedCase {
    std::string line;
    std::string reason;
};

inline const std::vector<MalformedCase>& malformed_corpus()
{
    static const std::vector<MalformedCase> corpus = {
        {"", "empty line"},
        {"JOIN", "missing id"},
        {"JOIN ", "empty id"},
        {"JOIN alice bob", "too many fields"},
        {"JOIN al ice", "too many fields"},
        {"JOIN al@ice", "invalid id 'al@ice'"},
        {"JOIN abcdefghijklmnopqrstuvwxyz0123456", "invalid id 'abcdefghijklmnopqrstuvwxyz0123456'"},
        {"join alice", "unknown verb 'join'"},
        {"HELLO", "unknown verb 'HELLO'"},
        {" JOIN alice", "unknown verb ''"},
        {"MSG", "missing body"},
        {"MSG ", "missing body"},
        {"PRIV bob", "missing body"},
        {"PRIV bob ", "missing body"},
        {"PRIV", "missing target"},
        {"PRIV b/b hi", "invalid target 'b/b'"},
        {"QUIT now", "too many fields"},
        {"QUIT ", "too many fields"},
        {"PONG", "missing nonce"},
        {"PONG -1", "invalid nonce"},
        {"PONG 007", "invalid nonce"},
        {"PONG 18446744073709551616", "invalid nonce"},
        {"PING 1 2", "too many fields"},
        {"WELCOME alice", "missing coordinator"},
        {"JOINED bob 127.0.0.1", "missing port"},
        {"JOINED bob 127.0.0.256 5000", "invalid ip"},
        {"JOINED bob 127.0.0.1 65536", "invalid port"},
        {"JOINED bob 127.0.0.1 05000", "invalid port"},
        {"LEFT bob", "missing reason"},
        {"LEFT bob vanished", "invalid leave reason"},
        {"COORD", "missing id"},
        {"BCAST 2024-03-01 10:00:00 alice", "missing body"},
        {"BCAST 2024-03-01T10:00:00 alice hi", "invalid timestamp"},
        {"BCAST 2024-13-01 10:00:00 alice hi", "invalid timestamp"},
        {"PRIVMSG 2024-03-01 10:00 alice hi", "invalid timestamp"},
        {"MEMBERS ", "missing member list"},
        {"MEMBERS alice,127.0.0.1", "member entry must be id,ip,port"},
        {"MEMBERS alice,127.0.0.1,5001;", "member entry must be id,ip,port"},
        {"MEMBERS alice,127.0.0.1,5001,1", "member entry must be id,ip,port"},
        {"MEMBERS al ice,127.0.0.1,5001", "invalid member id"},
        {"MEMBERS alice,1.2.3,5001", "invalid member ip"},
        {"ERR", "missing error code"},
        {"ERR oops something", "invalid error code"},
        {"ERR bad_frame ", "missing body"},
        {"MSG hi\rthere", "embedded line break"},
        {"MSG \xC3", "invalid UTF-8"},
        {"MSG \xC0\xAF", "invalid UTF-8"},
        {"MSG \xED\xA0\x80", "invalid UTF-8"},
    };
    return corpus;
}

/// Civil date from days since 1970-01-01 (proleptic Gregorian), computed by
/// era arithmetic independent of the C library.
inline std::string civil_timestamp(std::int64_t epoch_seconds)
{
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const std::int64_t doe = days - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
    const std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
    if (m <= 2) ++y;

    char buf[128];
    std::snprintf(buf, sizeof buf, "%04lld-%02lld-%02lld %02lld:%02lld:%02lld",
                  static_cast<long long>(y), static_cast<long long>(m), static_cast<long long>(d),
                  static_cast<long long>(rem / 3600), static_cast<long long>(rem % 3600 / 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

}  // namespace gcs::testing
