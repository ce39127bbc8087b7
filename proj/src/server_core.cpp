#include "gcs/server_core.hpp"

#include <type_traits>

namespace gcs {

namespace {

std::string peer_of(const SessionState& s) { return s.peer_ip + ":" + std::to_string(s.peer_port); }

void broadcast(Effects& fx, const WireFrame& frame)
{
    for (const auto& m : fx.registry.members()) fx.outbound.push_back({m.id, frame});
}

void log(Effects& fx, const Timestamp& now, LogKind kind, std::string detail)
{
    fx.logs.push_back(LogEntry{now, kind, std::move(detail)});
}

HandleResult reply_error(SessionState session, const Registry& registry, const Timestamp& now,
                         ErrorCode code, std::string text, std::string log_detail)
{
    Effects fx{{}, registry, {}, std::nullopt};
    fx.outbound.push_back({ToOrigin{}, frame::Err{code, std::move(text)}});
    log(fx, now, LogKind::error,
        "code=" + std::string(to_string(code)) + " " + std::move(log_detail));
    return HandleResult{std::move(session), std::move(fx)};
}

// Announces a removal to the survivors.
void announce_departure(Effects& fx, const Removal& removal, const Timestamp& now)
{
    broadcast(fx, frame::Left{removal.removed.id, removal.reason});
    log(fx, now, LogKind::leave,
        "id=" + removal.removed.id.str() + " reason=" + std::string(to_string(removal.reason)));
    if (removal.new_coordinator) {
        broadcast(fx, frame::Coord{*removal.new_coordinator});
        log(fx, now, LogKind::coord_change, "id=" + removal.new_coordinator->str());
    }
}

HandleResult handle_join(SessionState session, const frame::Join& join, const Registry& registry,
                         const Timestamp& now)
{
    if (session.phase == SessionPhase::joined) {
        ++session.bad_frames;
        auto r = reply_error(session, registry, now, ErrorCode::bad_frame,
                             "already joined as " + session.member->str(),
                             "id=" + session.member->str() + " detail=repeated JOIN");
        if (r.session.bad_frames >= max_bad_frames) r.effects.close = LeaveReason::error;
        return r;
    }

    std::optional<Admission> admitted;
    try {
        admitted = add_member(registry, join.id, session.peer_ip, session.peer_port, now);
    } catch (const RegistryError&) {
        std::string detail = "peer=" + peer_of(session) + " id=" + join.id.str();
        session.phase = SessionPhase::closed;
        auto r = reply_error(std::move(session), registry, now, ErrorCode::duplicate_id,
                             "id " + join.id.str() + " is already in use", std::move(detail));
        r.effects.close = LeaveReason::error;
        return r;
    }
    Admission& admission = *admitted;

    session.phase = SessionPhase::joined;
    session.member = join.id;
    session.missed_pings = 0;
    session.bad_frames = 0;

    Effects fx{{}, std::move(admission.registry), {}, std::nullopt};
    fx.outbound.push_back({join.id, frame::Welcome{join.id, *fx.registry.coordinator()}});
    for (const auto& m : fx.registry.members()) {
        if (m.id != join.id)
            fx.outbound.push_back({m.id, frame::Joined{join.id, session.peer_ip, session.peer_port}});
    }
    log(fx, now, LogKind::join,
        "id=" + join.id.str() + " ip=" + session.peer_ip + " port=" + std::to_string(session.peer_port));
    if (admission.became_coordinator) {
        broadcast(fx, frame::Coord{join.id});
        log(fx, now, LogKind::coord_change, "id=" + join.id.str());
    }
    return HandleResult{std::move(session), std::move(fx)};
}

HandleResult handle_priv(SessionState session, const frame::Priv& priv, const Registry& registry,
                         const Timestamp& now)
{
    const MemberId sender = *session.member;

    if (priv.body == member_details_command) {
        if (registry.coordinator() != priv.target) {
            std::string actual = registry.coordinator() ? registry.coordinator()->str() : "nobody";
            return reply_error(std::move(session), registry, now, ErrorCode::not_coordinator,
                               priv.target.str() + " is not the coordinator; " + actual + " is",
                               "from=" + sender.str() + " target=" + priv.target.str());
        }
        Effects fx{{}, registry, {}, std::nullopt};
        auto entries = member_details(registry);
        auto count = entries.size();
        fx.outbound.push_back({sender, frame::Members{std::move(entries)}});
        log(fx, now, LogKind::details,
            "from=" + sender.str() + " coordinator=" + priv.target.str() +
                " members=" + std::to_string(count));
        return HandleResult{std::move(session), std::move(fx)};
    }

    if (!registry.contains(priv.target)) {
        return reply_error(std::move(session), registry, now, ErrorCode::unknown_target,
                           "no member named " + priv.target.str(),
                           "from=" + sender.str() + " target=" + priv.target.str());
    }
    Effects fx{{}, registry, {}, std::nullopt};
    const Member& target = resolve_target(registry, priv.target);
    fx.outbound.push_back({target.id, frame::PrivMsg{now, sender, priv.body}});
    log(fx, now, LogKind::private_message,
        "from=" + sender.str() + " to=" + target.id.str() + " len=" + std::to_string(priv.body.size()));
    return HandleResult{std::move(session), std::move(fx)};
}

}  // namespace

SessionState make_session(std::string peer_ip, std::uint16_t peer_port)
{
    SessionState s;
    s.peer_ip = std::move(peer_ip);
    s.peer_port = peer_port;
    return s;
}

HandleResult handle_frame(const SessionState& current, const WireFrame& frame,
                          const Registry& registry, const Timestamp& now)
{
    SessionState session = current;
    if (session.phase == SessionPhase::closed)
        return HandleResult{std::move(session), Effects{{}, registry, {}, std::nullopt}};

    if (const auto* join = std::get_if<frame::Join>(&frame))
        return handle_join(std::move(session), *join, registry, now);

    if (const auto* pong = std::get_if<frame::Pong>(&frame)) {
        if (session.last_nonce == pong->nonce) session.missed_pings = 0;
        return HandleResult{std::move(session), Effects{{}, registry, {}, std::nullopt}};
    }

    if (!is_client_frame(frame)) {
        ++session.bad_frames;
        auto r = reply_error(session, registry, now, ErrorCode::bad_frame,
                             "unexpected " + std::string(verb_of(frame)) + " from client",
                             "peer=" + peer_of(session) + " detail=unexpected " +
                                 std::string(verb_of(frame)));
        if (r.session.bad_frames >= max_bad_frames) r.effects.close = LeaveReason::error;
        return r;
    }

    if (session.phase != SessionPhase::joined) {
        return reply_error(std::move(session), registry, now, ErrorCode::not_joined,
                           "send JOIN <id> first",
                           "peer=" + peer_of(current) + " verb=" + std::string(verb_of(frame)));
    }

    session.bad_frames = 0;
    const MemberId& sender = *session.member;

    if (const auto* msg = std::get_if<frame::Msg>(&frame)) {
        Effects fx{{}, registry, {}, std::nullopt};
        broadcast(fx, frame::Bcast{now, sender, msg->body});
        log(fx, now, LogKind::broadcast,
            "from=" + sender.str() + " len=" + std::to_string(msg->body.size()));
        return HandleResult{std::move(session), std::move(fx)};
    }

    if (const auto* priv = std::get_if<frame::Priv>(&frame))
        return handle_priv(std::move(session), *priv, registry, now);

    // QUIT
    auto removal = remove_member(registry, sender, LeaveReason::quit);
    Effects fx{{}, removal.registry, {}, LeaveReason::quit};
    announce_departure(fx, removal, now);
    session.phase = SessionPhase::closed;
    session.member.reset();
    return HandleResult{std::move(session), std::move(fx)};
}

HandleResult handle_bad_frame(const SessionState& current, const std::string& reason,
                              const Registry& registry, const Timestamp& now)
{
    SessionState session = current;
    ++session.bad_frames;
    std::string who = session.member ? "id=" + session.member->str() : "peer=" + peer_of(session);
    auto r = reply_error(std::move(session), registry, now, ErrorCode::bad_frame, reason,
                         who + " detail=" + reason);
    if (r.session.bad_frames >= max_bad_frames) r.effects.close = LeaveReason::error;
    return r;
}

Effects on_disconnect(const SessionState& session, const Registry& registry, LeaveReason reason,
                      const Timestamp& now)
{
    if (session.phase == SessionPhase::joined && session.member && registry.contains(*session.member)) {
        auto removal = remove_member(registry, *session.member, reason);
        Effects fx{{}, removal.registry, {}, reason};
        announce_departure(fx, removal, now);
        return fx;
    }
    Effects fx{{}, registry, {}, reason};
    log(fx, now, LogKind::leave,
        "peer=" + peer_of(session) + " reason=" + std::string(to_string(reason)) + " joined=no");
    return fx;
}

SweepAction heartbeat_step(SessionState& session, const HeartbeatPolicy& policy,
                           std::uint64_t fresh_nonce)
{
    if (session.phase != SessionPhase::joined) return {};
    ++session.missed_pings;
    if (session.missed_pings > policy.misses) return {SweepAction::condemn, 0};
    session.last_nonce = fresh_nonce;
    return {SweepAction::ping, fresh_nonce};
}

// ---------------------------------------------------------------------------

void Outbox::append(Outbox&& other)
{
    frames.insert(frames.end(), std::make_move_iterator(other.frames.begin()),
                  std::make_move_iterator(other.frames.end()));
    closes.insert(closes.end(), other.closes.begin(), other.closes.end());
}

RoutingCore::RoutingCore(HeartbeatPolicy policy, LogSink& log, Clock clock)
    : policy_(policy), log_(log), clock_(std::move(clock))
{
}

const SessionState& RoutingCore::open_session(ConnId conn, std::string peer_ip, std::uint16_t peer_port)
{
    auto [it, inserted] = sessions_.insert_or_assign(conn, make_session(std::move(peer_ip), peer_port));
    return it->second;
}

const SessionState* RoutingCore::session(ConnId conn) const
{
    auto it = sessions_.find(conn);
    return it == sessions_.end() ? nullptr : &it->second;
}

void RoutingCore::log(LogKind kind, std::string detail)
{
    log_.append(LogEntry{now(), kind, std::move(detail)});
}

void RoutingCore::emit_logs(const std::vector<LogEntry>& logs)
{
    for (const auto& entry : logs) log_.append(entry);
}

void RoutingCore::rebuild_member_index()
{
    by_member_.clear();
    for (const auto& [conn, s] : sessions_)
        if (s.phase == SessionPhase::joined && s.member) by_member_.emplace(*s.member, conn);
}

Outbox RoutingCore::on_line(ConnId conn, std::string_view line)
{
    auto it = sessions_.find(conn);
    if (it == sessions_.end()) return {};
    std::optional<WireFrame> frame;
    try {
        frame = decode_frame(line);
    } catch (const BadFrame& e) {
        return apply(conn, handle_bad_frame(it->second, e.what(), registry_, now()));
    }
    return on_frame(conn, *frame);
}

Outbox RoutingCore::on_frame(ConnId conn, const WireFrame& frame)
{
    auto it = sessions_.find(conn);
    if (it == sessions_.end()) return {};
    return apply(conn, handle_frame(it->second, frame, registry_, now()));
}

Outbox RoutingCore::on_transport_closed(ConnId conn, LeaveReason reason)
{
    auto it = sessions_.find(conn);
    if (it == sessions_.end()) return {};
    auto fx = on_disconnect(it->second, registry_, reason, now());
    SessionState closed = it->second;
    closed.phase = SessionPhase::closed;
    return apply(conn, HandleResult{std::move(closed), std::move(fx)});
}

Outbox RoutingCore::sweep()
{
    Outbox out;
    std::vector<ConnId> condemned;
    for (auto& [conn, s] : sessions_) {
        auto action = heartbeat_step(s, policy_, next_nonce_);
        if (action.verdict == SweepAction::ping) {
            ++next_nonce_;
            out.frames.emplace_back(conn, frame::Ping{action.nonce});
        } else if (action.verdict == SweepAction::condemn) {
            condemned.push_back(conn);
        }
    }
    for (ConnId conn : condemned) {
        const auto& s = sessions_.at(conn);
        log(LogKind::ping_timeout,
            "id=" + s.member->str() + " missed=" + std::to_string(s.missed_pings));
        out.append(on_transport_closed(conn, LeaveReason::timeout));
    }
    return out;
}

Outbox RoutingCore::apply(ConnId origin, HandleResult result)
{
    Effects fx = std::move(result.effects);
    SessionState session = std::move(result.session);

    // A joined session closed for misbehaviour still has to leave the group.
    if (fx.close && session.phase == SessionPhase::joined) {
        auto departure = on_disconnect(session, fx.registry, *fx.close, now());
        fx.outbound.insert(fx.outbound.end(), std::make_move_iterator(departure.outbound.begin()),
                           std::make_move_iterator(departure.outbound.end()));
        fx.logs.insert(fx.logs.end(), departure.logs.begin(), departure.logs.end());
        fx.registry = std::move(departure.registry);
        session.phase = SessionPhase::closed;
        session.member.reset();
    }
    if (fx.close) session.phase = SessionPhase::closed;

    // Log before anything is handed to the transport.
    emit_logs(fx.logs);

    registry_ = std::move(fx.registry);
    if (session.phase == SessionPhase::closed) {
        sessions_.erase(origin);
    } else {
        sessions_[origin] = std::move(session);
    }
    rebuild_member_index();

    Outbox out;
    for (auto& ob : fx.outbound) {
        if (std::holds_alternative<ToOrigin>(ob.to)) {
            out.frames.emplace_back(origin, std::move(ob.frame));
            continue;
        }
        auto it = by_member_.find(std::get<MemberId>(ob.to));
        if (it != by_member_.end()) out.frames.emplace_back(it->second, std::move(ob.frame));
    }
    if (fx.close) out.closes.push_back(origin);
    return out;
}

}  // namespace gcs
