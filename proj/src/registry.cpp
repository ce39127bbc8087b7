#include "gcs/registry.hpp"

#include <algorithm>
#include <set>

namespace gcs {

struct RegistryAccess {
    static std::vector<Member>& members(Registry& r) { return r.members_; }
    static std::optional<MemberId>& coordinator(Registry& r) { return r.coordinator_; }
    static std::uint64_t& next_seq(Registry& r) { return r.next_seq_; }
};

const Member* Registry::find(const MemberId& id) const noexcept
{
    auto it = std::find_if(members_.begin(), members_.end(),
                           [&](const Member& m) { return m.id == id; });
    return it == members_.end() ? nullptr : &*it;
}

Admission add_member(const Registry& registry, const MemberId& id, std::string ip,
                     std::uint16_t port, Timestamp now)
{
    if (registry.contains(id))
        throw RegistryError(RegistryErrorKind::duplicate_id, "id '" + id.str() + "' is already in use");

    Registry next = registry;
    auto& seq = RegistryAccess::next_seq(next);
    Member member{id, std::move(ip), port, seq++, std::move(now)};
    RegistryAccess::members(next).push_back(member);

    bool became_coordinator = registry.empty();
    if (became_coordinator) RegistryAccess::coordinator(next) = id;
    return Admission{std::move(next), std::move(member), became_coordinator};
}

Removal remove_member(const Registry& registry, const MemberId& id, LeaveReason reason)
{
    const Member* found = registry.find(id);
    if (found == nullptr)
        throw RegistryError(RegistryErrorKind::unknown_member, "no member named '" + id.str() + "'");

    Removal out{registry, *found, reason, registry.coordinator() == id, std::nullopt};
    auto& members = RegistryAccess::members(out.registry);
    std::erase_if(members, [&](const Member& m) { return m.id == id; });

    if (out.was_coordinator) {
        // members stays sorted by join_seq, so the oldest survivor is first
        auto& coordinator = RegistryAccess::coordinator(out.registry);
        coordinator = members.empty() ? std::nullopt : std::optional(members.front().id);
        out.new_coordinator = coordinator;
    }
    return out;
}

std::vector<MemberEntry> member_details(const Registry& registry)
{
    std::vector<MemberEntry> out;
    out.reserve(registry.size());
    for (const auto& m : registry.members()) out.push_back(MemberEntry{m.id, m.ip, m.port});
    return out;
}

const Member& resolve_target(const Registry& registry, const MemberId& id)
{
    const Member* found = registry.find(id);
    if (found == nullptr)
        throw RegistryError(RegistryErrorKind::unknown_target, "no member named '" + id.str() + "'");
    return *found;
}

bool invariants_hold(const Registry& registry)
{
    const auto& members = registry.members();
    if (members.empty()) return !registry.coordinator().has_value();

    std::set<MemberId> ids;
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (!ids.insert(members[i].id).second) return false;
        if (i > 0 && members[i - 1].join_seq >= members[i].join_seq) return false;
        if (members[i].join_seq >= registry.next_seq()) return false;
    }
    auto oldest = std::min_element(members.begin(), members.end(),
                                   [](const Member& a, const Member& b) { return a.join_seq < b.join_seq; });
    return registry.coordinator() == oldest->id;
}

}  // namespace gcs
