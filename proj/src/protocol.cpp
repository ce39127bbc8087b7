#include "gcs/protocol.hpp"

#include <array>
#include <charconv>
#include <ctime>

namespace gcs {

namespace {

bool is_id_char(char c) noexcept
{
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-';
}

bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

// Canonical unsigned decimal: no sign, no leading zeros (except "0").
template <typename T>
std::optional<T> parse_unsigned(std::string_view text) noexcept
{
    if (text.empty() || (text.size() > 1 && text.front() == '0')) return std::nullopt;
    for (char c : text)
        if (!is_digit(c)) return std::nullopt;
    T value{};
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) return std::nullopt;
    return value;
}

std::string_view trim(std::string_view s) noexcept
{
    constexpr std::string_view ws = " \t\r\n\v\f";
    auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

// Walks the single-space separated fields after the verb. `rest` hands back
// everything that remains as one free-text field.
class FieldReader {
public:
    FieldReader() : done_(true) {}
    explicit FieldReader(std::string_view text) : text_(text) {}

    std::string_view next(const char* what)
    {
        if (done_) throw BadFrame(std::string("missing ") + what);
        auto pos = text_.find(' ');
        std::string_view field = text_.substr(0, pos);
        if (pos == std::string_view::npos) {
            done_ = true;
            text_ = {};
        } else {
            text_.remove_prefix(pos + 1);
        }
        if (field.empty()) throw BadFrame(std::string("empty ") + what);
        return field;
    }

    std::string_view rest(const char* what)
    {
        if (done_ || text_.empty()) throw BadFrame(std::string("missing ") + what);
        done_ = true;
        return std::exchange(text_, {});
    }

    bool at_end() const noexcept { return done_; }

    void expect_end()
    {
        if (!done_) throw BadFrame("too many fields");
    }

private:
    std::string_view text_;
    bool done_ = false;
};

MemberId read_id(FieldReader& fields, const char* what)
{
    auto text = fields.next(what);
    auto id = MemberId::parse(text);
    if (!id) throw BadFrame(std::string("invalid ") + what + " '" + std::string(text) + "'");
    return *id;
}

std::uint64_t read_nonce(FieldReader& fields)
{
    auto value = parse_unsigned<std::uint64_t>(fields.next("nonce"));
    if (!value) throw BadFrame("invalid nonce");
    return *value;
}

std::string read_body(FieldReader& fields)
{
    auto body = fields.rest("body");
    if (!is_valid_body(body)) throw BadFrame("invalid body");
    return std::string(body);
}

Timestamp read_timestamp(FieldReader& fields)
{
    auto date = fields.next("timestamp");
    auto time = fields.next("timestamp");
    std::string text;
    text.reserve(Timestamp::length);
    text.append(date).append(" ").append(time);
    auto ts = Timestamp::parse(text);
    if (!ts) throw BadFrame("invalid timestamp");
    return *ts;
}

std::string read_ip(FieldReader& fields)
{
    auto ip = fields.next("ip");
    if (!is_dotted_quad(ip)) throw BadFrame("invalid ip");
    return std::string(ip);
}

std::uint16_t read_port(std::string_view text)
{
    auto port = parse_unsigned<std::uint16_t>(text);
    if (!port) throw BadFrame("invalid port");
    return *port;
}

MemberEntry parse_member_entry(std::string_view text)
{
    auto c1 = text.find(',');
    auto c2 = c1 == std::string_view::npos ? c1 : text.find(',', c1 + 1);
    if (c2 == std::string_view::npos || text.find(',', c2 + 1) != std::string_view::npos)
        throw BadFrame("member entry must be id,ip,port");
    auto id = MemberId::parse(text.substr(0, c1));
    if (!id) throw BadFrame("invalid member id");
    auto ip = text.substr(c1 + 1, c2 - c1 - 1);
    if (!is_dotted_quad(ip)) throw BadFrame("invalid member ip");
    return MemberEntry{*id, std::string(ip), read_port(text.substr(c2 + 1))};
}

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

// ---------------------------------------------------------------------------

MemberId::MemberId(std::string value) : value_(std::move(value))
{
    if (!is_valid(value_)) throw std::invalid_argument("invalid member id '" + value_ + "'");
}

bool MemberId::is_valid(std::string_view value) noexcept
{
    if (value.empty() || value.size() > max_length) return false;
    for (char c : value)
        if (!is_id_char(c)) return false;
    return true;
}

std::optional<MemberId> MemberId::parse(std::string_view value)
{
    if (!is_valid(value)) return std::nullopt;
    return MemberId(std::string(value), Unchecked{});
}

Timestamp Timestamp::from(std::chrono::sys_seconds instant)
{
    std::time_t t = instant.time_since_epoch().count();
    std::tm tm{};
    if (gmtime_r(&t, &tm) == nullptr || tm.tm_year + 1900 < 0 || tm.tm_year + 1900 > 9999)
        throw std::out_of_range("instant outside the representable timestamp range");
    std::array<char, Timestamp::length + 1> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%d %H:%M:%S", &tm);
    return Timestamp(std::string(buf.data(), Timestamp::length));
}

std::optional<Timestamp> Timestamp::parse(std::string_view text)
{
    static constexpr std::string_view shape = "dddd-dd-dd dd:dd:dd";
    if (text.size() != shape.size()) return std::nullopt;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (shape[i] == 'd' ? !is_digit(text[i]) : text[i] != shape[i]) return std::nullopt;
    }
    auto num = [&](std::size_t pos) { return (text[pos] - '0') * 10 + (text[pos + 1] - '0'); };
    int month = num(5), day = num(8), hour = num(11), minute = num(14), second = num(17);
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
        return std::nullopt;
    return Timestamp(std::string(text));
}

Timestamp format_timestamp(std::chrono::sys_seconds instant) { return Timestamp::from(instant); }

std::chrono::sys_seconds system_now()
{
    return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

std::string_view to_string(LeaveReason reason) noexcept
{
    switch (reason) {
    case LeaveReason::quit: return "quit";
    case LeaveReason::timeout: return "timeout";
    case LeaveReason::error: return "error";
    }
    return "error";
}

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::duplicate_id: return "duplicate_id";
    case ErrorCode::unknown_target: return "unknown_target";
    case ErrorCode::not_coordinator: return "not_coordinator";
    case ErrorCode::bad_frame: return "bad_frame";
    case ErrorCode::not_joined: return "not_joined";
    }
    return "bad_frame";
}

std::optional<LeaveReason> parse_leave_reason(std::string_view text) noexcept
{
    for (auto r : {LeaveReason::quit, LeaveReason::timeout, LeaveReason::error})
        if (to_string(r) == text) return r;
    return std::nullopt;
}

std::optional<ErrorCode> parse_error_code(std::string_view text) noexcept
{
    for (auto c : {ErrorCode::duplicate_id, ErrorCode::unknown_target, ErrorCode::not_coordinator,
                   ErrorCode::bad_frame, ErrorCode::not_joined})
        if (to_string(c) == text) return c;
    return std::nullopt;
}

bool is_dotted_quad(std::string_view text) noexcept
{
    int octets = 0;
    while (true) {
        auto dot = text.find('.');
        auto part = text.substr(0, dot);
        auto value = parse_unsigned<unsigned>(part);
        if (!value || part.size() > 3 || *value > 255) return false;
        ++octets;
        if (dot == std::string_view::npos) break;
        text.remove_prefix(dot + 1);
    }
    return octets == 4;
}

bool is_valid_utf8(std::string_view text) noexcept
{
    std::size_t i = 0;
    while (i < text.size()) {
        auto c = static_cast<unsigned char>(text[i]);
        std::size_t len;
        char32_t cp;
        if (c < 0x80) { ++i; continue; }
        if ((c & 0xE0) == 0xC0) { len = 2; cp = c & 0x1F; }
        else if ((c & 0xF0) == 0xE0) { len = 3; cp = c & 0x0F; }
        else if ((c & 0xF8) == 0xF0) { len = 4; cp = c & 0x07; }
        else return false;
        if (i + len > text.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(text[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // overlong forms, surrogates, out of range
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
            (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)
            return false;
        i += len;
    }
    return true;
}

bool is_valid_body(std::string_view text) noexcept
{
    return !text.empty() && text.find_first_of("\r\n") == std::string_view::npos &&
           is_valid_utf8(text);
}

std::string_view verb_of(const WireFrame& frame) noexcept
{
    static constexpr std::array<std::string_view, std::variant_size_v<WireFrame>> verbs = {
        "JOIN", "MSG", "PRIV", "QUIT", "PONG", "WELCOME", "JOINED",
        "LEFT", "COORD", "BCAST", "PRIVMSG", "MEMBERS", "ERR", "PING"};
    return verbs[frame.index()];
}

bool is_client_frame(const WireFrame& frame) noexcept
{
    return std::holds_alternative<frame::Join>(frame) || std::holds_alternative<frame::Msg>(frame) ||
           std::holds_alternative<frame::Priv>(frame) ||
           std::holds_alternative<frame::Quit>(frame) || std::holds_alternative<frame::Pong>(frame);
}

std::string encode_frame(const WireFrame& frame)
{
    std::string out(verb_of(frame));
    auto field = [&out](std::string_view f) { out.append(" ").append(f); };

    std::visit(overloaded{
                   [&](const frame::Join& f) { field(f.id.str()); },
                   [&](const frame::Msg& f) { field(f.body); },
                   [&](const frame::Priv& f) { field(f.target.str()); field(f.body); },
                   [&](const frame::Quit&) {},
                   [&](const frame::Pong& f) { field(std::to_string(f.nonce)); },
                   [&](const frame::Welcome& f) { field(f.own_id.str()); field(f.coordinator.str()); },
                   [&](const frame::Joined& f) {
                       field(f.id.str());
                       field(f.ip);
                       field(std::to_string(f.port));
                   },
                   [&](const frame::Left& f) { field(f.id.str()); field(to_string(f.reason)); },
                   [&](const frame::Coord& f) { field(f.id.str()); },
                   [&](const frame::Bcast& f) { field(f.ts.str()); field(f.from.str()); field(f.body); },
                   [&](const frame::PrivMsg& f) { field(f.ts.str()); field(f.from.str()); field(f.body); },
                   [&](const frame::Members& f) {
                       for (std::size_t i = 0; i < f.entries.size(); ++i) {
                           const auto& e = f.entries[i];
                           out.append(i == 0 ? " " : ";");
                           out.append(e.id.str()).append(",").append(e.ip).append(",");
                           out.append(std::to_string(e.port));
                       }
                   },
                   [&](const frame::Err& f) {
                       field(to_string(f.code));
                       if (!f.text.empty()) field(f.text);
                   },
                   [&](const frame::Ping& f) { field(std::to_string(f.nonce)); },
               },
               frame);
    out.push_back('\n');
    return out;
}

WireFrame decode_frame(std::string_view line)
{
    if (line.empty()) throw BadFrame("empty line");
    if (line.find_first_of("\r\n") != std::string_view::npos) throw BadFrame("embedded line break");
    if (!is_valid_utf8(line)) throw BadFrame("invalid UTF-8");

    auto space = line.find(' ');
    auto verb = line.substr(0, space);
    FieldReader fields = space == std::string_view::npos ? FieldReader()
                                                         : FieldReader(line.substr(space + 1));

    auto finish = [&fields](WireFrame frame) {
        fields.expect_end();
        return frame;
    };

    if (verb == "JOIN") return finish(frame::Join{read_id(fields, "id")});
    if (verb == "MSG") return finish(frame::Msg{read_body(fields)});
    if (verb == "PRIV") {
        auto target = read_id(fields, "target");
        return finish(frame::Priv{std::move(target), read_body(fields)});
    }
    if (verb == "QUIT") return finish(frame::Quit{});
    if (verb == "PONG") return finish(frame::Pong{read_nonce(fields)});
    if (verb == "PING") return finish(frame::Ping{read_nonce(fields)});
    if (verb == "WELCOME") {
        auto own = read_id(fields, "own id");
        return finish(frame::Welcome{std::move(own), read_id(fields, "coordinator")});
    }
    if (verb == "JOINED") {
        auto id = read_id(fields, "id");
        auto ip = read_ip(fields);
        auto port = read_port(fields.next("port"));
        return finish(frame::Joined{std::move(id), std::move(ip), port});
    }
    if (verb == "LEFT") {
        auto id = read_id(fields, "id");
        auto reason = parse_leave_reason(fields.next("reason"));
        if (!reason) throw BadFrame("invalid leave reason");
        return finish(frame::Left{std::move(id), *reason});
    }
    if (verb == "COORD") return finish(frame::Coord{read_id(fields, "id")});
    if (verb == "BCAST" || verb == "PRIVMSG") {
        auto ts = read_timestamp(fields);
        auto from = read_id(fields, "sender");
        auto body = read_body(fields);
        if (verb == "BCAST") return frame::Bcast{std::move(ts), std::move(from), std::move(body)};
        return frame::PrivMsg{std::move(ts), std::move(from), std::move(body)};
    }
    if (verb == "MEMBERS") {
        frame::Members members;
        if (!fields.at_end()) {
            auto list = fields.rest("member list");
            while (true) {
                auto semi = list.find(';');
                members.entries.push_back(parse_member_entry(list.substr(0, semi)));
                if (semi == std::string_view::npos) break;
                list.remove_prefix(semi + 1);
            }
        }
        return members;
    }
    if (verb == "ERR") {
        auto code = parse_error_code(fields.next("error code"));
        if (!code) throw BadFrame("invalid error code");
        std::string text;
        if (!fields.at_end()) text = read_body(fields);
        return frame::Err{*code, std::move(text)};
    }
    throw BadFrame("unknown verb '" + std::string(verb) + "'");
}

std::string_view to_string(InputErrorKind kind) noexcept
{
    switch (kind) {
    case InputErrorKind::empty_input: return "empty_input";
    case InputErrorKind::bad_target: return "bad_target";
    case InputErrorKind::embedded_newline: return "embedded_newline";
    case InputErrorKind::invalid_encoding: return "invalid_encoding";
    }
    return "empty_input";
}

ClientCommand parse_user_input(std::string_view text, const std::optional<MemberId>&)
{
    auto input = trim(text);
    if (input.empty()) throw InputError(InputErrorKind::empty_input, "nothing to send");
    if (input.find_first_of("\r\n") != std::string_view::npos)
        throw InputError(InputErrorKind::embedded_newline, "messages must be a single line");
    if (!is_valid_utf8(input))
        throw InputError(InputErrorKind::invalid_encoding, "input is not valid UTF-8");

    if (input == quit_command) return command::Quit{};
    if (input.front() != '@') return command::Broadcast{std::string(input)};

    auto split = input.find_first_of(" \t");
    auto target_text = input.substr(1, split == std::string_view::npos ? split : split - 1);
    auto target = MemberId::parse(target_text);
    if (!target)
        throw InputError(InputErrorKind::bad_target,
                         "'@" + std::string(target_text) + "' does not name a valid member id");
    auto body = split == std::string_view::npos ? std::string_view{} : trim(input.substr(split));
    if (body.empty())
        throw InputError(InputErrorKind::empty_input,
                         "private message to " + target->str() + " has no body");
    if (body == member_details_command) return command::DetailsRequest{std::move(*target)};
    return command::Private{std::move(*target), std::string(body)};
}

}  // namespace gcs
