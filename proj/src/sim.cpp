#include "gcs/sim.hpp"

#include <algorithm>

namespace gcs {

SimNetwork::SimNetwork(SimConfig config)
    : config_(config),
      now_(config.start),
      next_sweep_(config.start + config.heartbeat.interval),
      core_(config.heartbeat, log_, [this] { return now_; })
{
    if (config.heartbeat.interval <= std::chrono::seconds::zero() || config.heartbeat.misses < 1)
        throw SimError("heartbeat interval must be positive and misses at least 1");
    if (config.shuffle_seed) rng_.emplace(*config.shuffle_seed);
}

SimClient& SimNetwork::client_mut(const std::string& handle)
{
    auto it = clients_.find(handle);
    if (it == clients_.end()) throw SimError("unknown simulated client '" + handle + "'");
    return it->second;
}

const SimClient& SimNetwork::client(const std::string& handle) const
{
    auto it = clients_.find(handle);
    if (it == clients_.end()) throw SimError("unknown simulated client '" + handle + "'");
    return it->second;
}

std::vector<std::string> SimNetwork::handles() const
{
    std::vector<std::string> out;
    for (const auto& [h, c] : clients_) out.push_back(h);
    return out;
}

SimClient& SimNetwork::open_connection(const std::string& handle, const MemberId& wire_id)
{
    if (clients_.count(handle)) throw SimError("duplicate simulated client '" + handle + "'");
    ConnId conn = next_conn_++;
    SimClient c{handle, wire_id, conn, "127.0.0.1", static_cast<std::uint16_t>(40000 + conn), {}, {}, {}};
    core_.open_session(conn, c.ip, c.port);
    handle_of_[conn] = handle;
    return clients_.emplace(handle, std::move(c)).first->second;
}

SimClient& SimNetwork::connect_client(const std::string& handle, std::optional<MemberId> wire_id)
{
    MemberId id = wire_id ? *wire_id : MemberId(handle);
    SimClient& c = open_connection(handle, id);
    enqueue(c.conn, Direction::to_server, encode_frame(begin_join(c.state, id)));
    return c;
}

InputOutcome SimNetwork::submit(const std::string& handle, std::string_view text)
{
    SimClient& c = client_mut(handle);
    auto outcome = submit_input(c.state, text);
    c.events.insert(c.events.end(), outcome.events.begin(), outcome.events.end());
    if (outcome.frame && c.connected)
        enqueue(c.conn, Direction::to_server, encode_frame(*outcome.frame));
    return outcome;
}

void SimNetwork::send_raw(const std::string& handle, std::string line)
{
    SimClient& c = client_mut(handle);
    if (!line.empty() && line.back() == '\n') line.pop_back();
    if (c.connected) enqueue(c.conn, Direction::to_server, line + "\n");
}

void SimNetwork::mute(const std::string& handle, bool muted) { client_mut(handle).muted = muted; }

void SimNetwork::enqueue(ConnId conn, Direction dir, std::optional<std::string> line)
{
    if (line && !line->empty() && line->back() == '\n') line->pop_back();
    channels_[{conn, dir}].push_back(Pending{next_seq_++, std::move(line)});
}

std::size_t SimNetwork::pending() const noexcept
{
    std::size_t n = 0;
    for (const auto& [key, q] : channels_) n += q.size();
    return n;
}

void SimNetwork::route(Outbox&& out)
{
    for (auto& [conn, frame] : out.frames) {
        auto it = handle_of_.find(conn);
        if (it == handle_of_.end() || !clients_.at(it->second).connected) continue;
        enqueue(conn, Direction::to_client, encode_frame(frame));
    }
    for (ConnId conn : out.closes) {
        auto it = handle_of_.find(conn);
        if (it == handle_of_.end() || !clients_.at(it->second).connected) continue;
        enqueue(conn, Direction::to_client, std::nullopt);
    }
}

std::optional<TranscriptRecord> SimNetwork::step()
{
    std::vector<ChannelKey> ready;
    for (const auto& [key, q] : channels_)
        if (!q.empty()) ready.push_back(key);
    if (ready.empty()) return std::nullopt;

    ChannelKey chosen;
    if (rng_) {
        std::uniform_int_distribution<std::size_t> pick(0, ready.size() - 1);
        chosen = ready[pick(*rng_)];
    } else {
        chosen = *std::min_element(ready.begin(), ready.end(), [&](const auto& a, const auto& b) {
            return channels_[a].front().seq < channels_[b].front().seq;
        });
    }
    auto& queue = channels_[chosen];
    Pending p = std::move(queue.front());
    queue.pop_front();
    deliver(chosen, std::move(p));
    return transcript_.back();
}

void SimNetwork::deliver(const ChannelKey& key, Pending pending)
{
    auto [conn, dir] = key;
    SimClient& c = clients_.at(handle_of_.at(conn));

    TranscriptRecord rec{now_, dir, c.handle, std::nullopt, pending.line.value_or("<eof>")};
    if (pending.line) {
        try {
            rec.frame = decode_frame(*pending.line);
        } catch (const BadFrame&) {
        }
    }
    transcript_.push_back(rec);

    if (dir == Direction::to_server) {
        route(pending.line ? core_.on_line(conn, *pending.line) : core_.on_transport_closed(conn));
        return;
    }

    if (!pending.line) {
        c.connected = false;
        channels_.erase({conn, Direction::to_server});
        auto lost = on_connection_lost(c.state, "server_closed");
        c.events.insert(c.events.end(), lost.events.begin(), lost.events.end());
        return;
    }
    if (rec.frame) c.received.push_back(*rec.frame);
    auto applied = apply_server_line(c.state, *pending.line);
    c.events.insert(c.events.end(), applied.events.begin(), applied.events.end());
    if (applied.auto_reply && !c.muted)
        enqueue(conn, Direction::to_server, encode_frame(*applied.auto_reply));
}

std::size_t SimNetwork::run_until_quiet(std::size_t max_steps)
{
    std::size_t n = 0;
    while (n < max_steps && step()) ++n;
    return n;
}

void SimNetwork::advance_time(std::chrono::seconds dt)
{
    if (dt < std::chrono::seconds::zero()) throw SimError("cannot move time backwards");
    const auto target = now_ + dt;
    while (next_sweep_ <= target) {
        now_ = next_sweep_;
        next_sweep_ += config_.heartbeat.interval;
        ++sweeps_;
        route(core_.sweep());
        run_until_quiet();
    }
    now_ = target;
}

void SimNetwork::drop_connection(const std::string& handle)
{
    SimClient& c = client_mut(handle);
    if (!c.connected) throw SimError("client '" + handle + "' is not connected");
    c.connected = false;
    channels_.erase({c.conn, Direction::to_server});
    channels_.erase({c.conn, Direction::to_client});
    auto lost = on_connection_lost(c.state, "dropped");
    c.events.insert(c.events.end(), lost.events.begin(), lost.events.end());

    transcript_.push_back(TranscriptRecord{now_, Direction::to_server, c.handle, std::nullopt, "<eof>"});
    route(core_.on_transport_closed(c.conn, LeaveReason::error));
}

std::string SimNetwork::transcript_text() const
{
    std::string out;
    for (const auto& r : transcript_) {
        out.append("[").append(format_timestamp(r.time).str()).append("] ");
        out.append(r.endpoint).append(r.direction == Direction::to_server ? " > " : " < ");
        out.append(r.line).append("\n");
    }
    return out;
}

std::uint64_t SimNetwork::transcript_hash() const
{
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : transcript_text()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace gcs
