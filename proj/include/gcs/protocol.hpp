#pragma once

// Line-oriented wire grammar shared by the server, the clients and the gateway.
//
// Every frame is one UTF-8 line: a verb, then space-separated fields. When a
// frame carries free text (a message body or an error text) it is the last
// field and may contain spaces. Frames never contain '\n' or '\r'.

#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gcs {

/// Client identifier: 1-32 characters from [A-Za-z0-9_-], case-sensitive.
class MemberId {
public:
    static constexpr std::size_t max_length = 32;

    /// Throws std::invalid_argument when `value` is not a valid id.
    explicit MemberId(std::string value);

    static bool is_valid(std::string_view value) noexcept;
    static std::optional<MemberId> parse(std::string_view value);

    const std::string& str() const noexcept { return value_; }

    friend bool operator==(const MemberId&, const MemberId&) = default;
    friend auto operator<=>(const MemberId&, const MemberId&) = default;

private:
    struct Unchecked {};
    MemberId(std::string value, Unchecked) : value_(std::move(value)) {}

    std::string value_;
};

/// UTC wall-clock time rendered as `YYYY-MM-DD HH:MM:SS`. Ordering of the
/// text equals chronological ordering.
class Timestamp {
public:
    static constexpr std::size_t length = 19;

    static Timestamp from(std::chrono::sys_seconds instant);
    static std::optional<Timestamp> parse(std::string_view text);

    const std::string& str() const noexcept { return text_; }

    friend bool operator==(const Timestamp&, const Timestamp&) = default;
    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;

private:
    explicit Timestamp(std::string text) : text_(std::move(text)) {}

    std::string text_;
};

Timestamp format_timestamp(std::chrono::sys_seconds instant);

/// Source of wall-clock time; production uses the system clock, tests and the
/// simulator supply their own.
using Clock = std::function<std::chrono::sys_seconds()>;
std::chrono::sys_seconds system_now();

enum class LeaveReason { quit, timeout, error };
enum class ErrorCode { duplicate_id, unknown_target, not_coordinator, bad_frame, not_joined };

std::string_view to_string(LeaveReason reason) noexcept;
std::string_view to_string(ErrorCode code) noexcept;
std::optional<LeaveReason> parse_leave_reason(std::string_view text) noexcept;
std::optional<ErrorCode> parse_error_code(std::string_view text) noexcept;

bool is_dotted_quad(std::string_view text) noexcept;
bool is_valid_utf8(std::string_view text) noexcept;

/// Free-text fields (bodies) must be non-empty UTF-8 without line breaks.
bool is_valid_body(std::string_view text) noexcept;

struct MemberEntry {
    MemberId id;
    std::string ip;
    std::uint16_t port = 0;

    friend bool operator==(const MemberEntry&, const MemberEntry&) = default;
};

namespace frame {

// client -> server
struct Join { MemberId id; friend bool operator==(const Join&, const Join&) = default; };
struct Msg { std::string body; friend bool operator==(const Msg&, const Msg&) = default; };
struct Priv {
    MemberId target;
    std::string body;
    friend bool operator==(const Priv&, const Priv&) = default;
};
struct Quit { friend bool operator==(const Quit&, const Quit&) = default; };
struct Pong { std::uint64_t nonce = 0; friend bool operator==(const Pong&, const Pong&) = default; };

// server -> client
struct Welcome {
    MemberId own_id;
    MemberId coordinator;
    friend bool operator==(const Welcome&, const Welcome&) = default;
};
struct Joined {
    MemberId id;
    std::string ip;
    std::uint16_t port = 0;
    friend bool operator==(const Joined&, const Joined&) = default;
};
struct Left {
    MemberId id;
    LeaveReason reason = LeaveReason::quit;
    friend bool operator==(const Left&, const Left&) = default;
};
struct Coord { MemberId id; friend bool operator==(const Coord&, const Coord&) = default; };
struct Bcast {
    Timestamp ts;
    MemberId from;
    std::string body;
    friend bool operator==(const Bcast&, const Bcast&) = default;
};
struct PrivMsg {
    Timestamp ts;
    MemberId from;
    std::string body;
    friend bool operator==(const PrivMsg&, const PrivMsg&) = default;
};
struct Members {
    std::vector<MemberEntry> entries;
    friend bool operator==(const Members&, const Members&) = default;
};
struct Err {
    ErrorCode code = ErrorCode::bad_frame;
    std::string text;  // may be empty
    friend bool operator==(const Err&, const Err&) = default;
};
struct Ping { std::uint64_t nonce = 0; friend bool operator==(const Ping&, const Ping&) = default; };

}  // namespace frame

using WireFrame = std::variant<frame::Join, frame::Msg, frame::Priv, frame::Quit, frame::Pong,
                               frame::Welcome, frame::Joined, frame::Left, frame::Coord,
                               frame::Bcast, frame::PrivMsg, frame::Members, frame::Err,
                               frame::Ping>;

std::string_view verb_of(const WireFrame& frame) noexcept;

/// True for JOIN MSG PRIV QUIT PONG.
bool is_client_frame(const WireFrame& frame) noexcept;

/// Malformed peer input. `reason` is a short human-readable description.
class BadFrame : public std::runtime_error {
public:
    explicit BadFrame(const std::string& reason) : std::runtime_error(reason) {}
};

/// Serializes `frame` as one line including the trailing '\n'. The frame must
/// satisfy its field invariants (valid ids, addresses and bodies).
std::string encode_frame(const WireFrame& frame);

/// Parses one line without its terminator. Any line accepted here re-encodes
/// to exactly the same text.
WireFrame decode_frame(std::string_view line);

// ---------------------------------------------------------------------------
// Human input classification

namespace command {
struct Broadcast { std::string body; friend bool operator==(const Broadcast&, const Broadcast&) = default; };
struct Private {
    MemberId target;
    std::string body;
    friend bool operator==(const Private&, const Private&) = default;
};
struct DetailsRequest {
    MemberId target;
    friend bool operator==(const DetailsRequest&, const DetailsRequest&) = default;
};
struct Quit { friend bool operator==(const Quit&, const Quit&) = default; };
}  // namespace command

using ClientCommand =
    std::variant<command::Broadcast, command::Private, command::DetailsRequest, command::Quit>;

inline constexpr std::string_view quit_command = "/quit";
inline constexpr std::string_view member_details_command = "/memberdetails";

enum class InputErrorKind { empty_input, bad_target, embedded_newline, invalid_encoding };
std::string_view to_string(InputErrorKind kind) noexcept;

class InputError : public std::runtime_error {
public:
    InputError(InputErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    InputErrorKind kind() const noexcept { return kind_; }

private:
    InputErrorKind kind_;
};

/// Classifies one line of user input:
///   `/quit`                 -> Quit
///   `@<id> /memberdetails`  -> DetailsRequest(id)
///   `@<id> <body>`          -> Private(id, body)
///   anything else           -> Broadcast(text)
/// Surrounding whitespace is trimmed first. Throws InputError.
///
/// `coordinator` is accepted for symmetry with the client state machine; the
/// classification itself does not depend on it (the server adjudicates).
ClientCommand parse_user_input(std::string_view text,
                               const std::optional<MemberId>& coordinator = std::nullopt);

}  // namespace gcs
