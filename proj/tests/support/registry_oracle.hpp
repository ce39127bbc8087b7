#pragma once

// Brute-force membership oracle: replays a join/leave trace keeping only a
// list of (id, admission index) and recomputes the coordinator as the minimum
// admission index among survivors after every step.

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gcs::testing {

struct TraceStep {
    bool join;
    std::string id;
};

class MembershipOracle {
public:
    /// Returns false if the step must be refused (duplicate join / unknown leave).
    bool apply(const TraceStep& step)
    {
        auto it = std::find_if(live_.begin(), live_.end(), [&](const auto& p) { return p.first == step.id; });
        if (step.join) {
            if (it != live_.end()) return false;
            live_.emplace_back(step.id, admitted_++);
            return true;
        }
        if (it == live_.end()) return false;
        live_.erase(it);
        return true;
    }

    std::optional<std::string> coordinator() const
    {
        if (live_.empty()) return std::nullopt;
        auto best = live_.front();
        for (const auto& p : live_)
            if (p.second < best.second) best = p;
        return best.first;
    }

    std::vector<std::string> ids_in_join_order() const
    {
        auto sorted = live_;
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
        std::vector<std::string> out;
        for (const auto& p : sorted) out.push_back(p.first);
        return out;
    }

private:
    std::vector<std::pair<std::string, unsigned>> live_;
    unsigned admitted_ = 0;
};

}  // namespace gcs::testing
