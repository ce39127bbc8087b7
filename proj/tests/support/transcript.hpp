#pragma once

// Queries over simulator transcripts.

#include <algorithm>
#include <string>
#include <vector>

#include "gcs/sim.hpp"

namespace gcs::testing {

template <class F>
std::vector<const TranscriptRecord*> delivered_to_clients(const SimNetwork& net)
{
    std::vector<const TranscriptRecord*> out;
    for (const auto& r : net.transcript())
        if (r.direction == Direction::to_client && r.frame && std::holds_alternative<F>(*r.frame))
            out.push_back(&r);
    return out;
}

template <class F>
std::size_t count_frames(const SimClient& c)
{
    return static_cast<std::size_t>(std::count_if(c.received.begin(), c.received.end(),
                                                  [](const WireFrame& f) { return std::holds_alternative<F>(f); }));
}

template <class F>
std::vector<F> frames_of(const SimClient& c)
{
    std::vector<F> out;
    for (const auto& f : c.received)
        if (const auto* p = std::get_if<F>(&f)) out.push_back(*p);
    return out;
}

inline bool transcript_has(const SimNetwork& net, const std::string& endpoint, Direction dir,
                           const std::string& line)
{
    const auto& t = net.transcript();
    return std::any_of(t.begin(), t.end(), [&](const TranscriptRecord& r) {
        return r.endpoint == endpoint && r.direction == dir && r.line == line;
    });
}

}  // namespace gcs::testing
