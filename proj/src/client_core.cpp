#include "gcs/client_core.hpp"

namespace gcs {

namespace {

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ApplyOutcome close_with(ClientState& state, const std::string& reason)
{
    ApplyOutcome out;
    if (state.closed()) return out;
    state.phase = client_phase::Closed{reason};
    out.events.push_back(event::Disconnected{reason});
    return out;
}

}  // namespace

std::optional<MemberId> ClientState::coordinator() const
{
    if (const auto* a = std::get_if<client_phase::Active>(&phase)) return a->coordinator;
    return std::nullopt;
}

WireFrame begin_join(ClientState& state, const MemberId& id)
{
    state.phase = client_phase::Joining{id};
    return frame::Join{id};
}

InputOutcome submit_input(ClientState& state, std::string_view text)
{
    InputOutcome out;
    if (!state.active()) {
        out.events.push_back(event::Error{"not_active", "not connected to a group"});
        return out;
    }

    ClientCommand cmd;
    try {
        cmd = parse_user_input(text, state.coordinator());
    } catch (const InputError& e) {
        out.events.push_back(event::Error{std::string(to_string(e.kind())), e.what()});
        return out;
    }

    std::visit(overloaded{
                   [&](command::Broadcast& c) { out.frame = frame::Msg{std::move(c.body)}; },
                   [&](command::Private& c) {
                       out.frame = frame::Priv{std::move(c.target), std::move(c.body)};
                   },
                   // Addressed to a stale coordinator, the request still goes out
                   // and the server answers not_coordinator.
                   [&](command::DetailsRequest& c) {
                       out.frame = frame::Priv{std::move(c.target), std::string(member_details_command)};
                   },
                   [&](command::Quit&) {
                       out.frame = frame::Quit{};
                       state.phase = client_phase::Closed{"quit"};
                   },
               },
               cmd);
    return out;
}

ApplyOutcome apply_server_frame(ClientState& state, const WireFrame& frame)
{
    ApplyOutcome out;
    if (state.closed()) return out;

    std::visit(
        overloaded{
            [&](const frame::Welcome& f) {
                state.phase = client_phase::Active{f.own_id, f.coordinator};
                out.events.push_back(event::Joined{f.own_id, f.coordinator});
            },
            [&](const frame::Joined& f) {
                out.events.push_back(event::PeerJoined{f.id, f.ip, f.port});
            },
            [&](const frame::Left& f) { out.events.push_back(event::PeerLeft{f.id, f.reason}); },
            [&](const frame::Coord& f) {
                if (auto* a = std::get_if<client_phase::Active>(&state.phase)) a->coordinator = f.id;
                out.events.push_back(event::NewCoordinator{f.id});
            },
            [&](const frame::Bcast& f) {
                out.events.push_back(event::Message{f.ts, f.from, f.body, MessageKind::public_message});
            },
            [&](const frame::PrivMsg& f) {
                out.events.push_back(event::Message{f.ts, f.from, f.body, MessageKind::private_message});
            },
            [&](const frame::Members& f) {
                state.roster = f.entries;
                out.events.push_back(event::Roster{f.entries});
            },
            [&](const frame::Err& f) {
                out.events.push_back(event::Error{std::string(to_string(f.code)), f.text});
            },
            [&](const frame::Ping& f) { out.auto_reply = frame::Pong{f.nonce}; },
            [&](const auto& f) {
                // a server never sends client-bound verbs
                out.events.push_back(event::Error{
                    "protocol_error", "unexpected " + std::string(verb_of(WireFrame{f})) + " from server"});
                auto closed = close_with(state, "protocol_error");
                out.events.insert(out.events.end(), closed.events.begin(), closed.events.end());
            },
        },
        frame);
    return out;
}

ApplyOutcome apply_server_line(ClientState& state, std::string_view line)
{
    std::optional<WireFrame> frame;
    try {
        frame = decode_frame(line);
    } catch (const BadFrame& e) {
        if (state.closed()) return {};
        ApplyOutcome out;
        out.events.push_back(event::Error{"protocol_error", e.what()});
        auto closed = close_with(state, "protocol_error");
        out.events.insert(out.events.end(), closed.events.begin(), closed.events.end());
        return out;
    }
    return apply_server_frame(state, *frame);
}

ApplyOutcome on_connection_lost(ClientState& state, const std::string& reason)
{
    return close_with(state, reason);
}

}  // namespace gcs
