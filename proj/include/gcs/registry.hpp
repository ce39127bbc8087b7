#pragma once

// Group membership as a plain value. Transition functions never modify their
// input; they return the successor state together with what happened.
//
// Election rule: the first member admitted is the coordinator; when the
// coordinator leaves, the surviving member with the smallest join sequence
// number takes over.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcs/protocol.hpp"

namespace gcs {

struct Member {
    MemberId id;
    std::string ip;
    std::uint16_t port = 0;
    std::uint64_t join_seq = 0;
    Timestamp joined_at;

    friend bool operator==(const Member&, const Member&) = default;
};

class Registry {
public:
    Registry() = default;

    /// Members in ascending join_seq order.
    const std::vector<Member>& members() const noexcept { return members_; }
    const std::optional<MemberId>& coordinator() const noexcept { return coordinator_; }
    std::uint64_t next_seq() const noexcept { return next_seq_; }

    bool empty() const noexcept { return members_.empty(); }
    std::size_t size() const noexcept { return members_.size(); }
    bool contains(const MemberId& id) const noexcept { return find(id) != nullptr; }
    const Member* find(const MemberId& id) const noexcept;

    friend bool operator==(const Registry&, const Registry&) = default;

private:
    friend struct RegistryAccess;

    std::vector<Member> members_;
    std::optional<MemberId> coordinator_;
    std::uint64_t next_seq_ = 0;
};

enum class RegistryErrorKind { duplicate_id, unknown_member, unknown_target };

class RegistryError : public std::runtime_error {
public:
    RegistryError(RegistryErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    RegistryErrorKind kind() const noexcept { return kind_; }

private:
    RegistryErrorKind kind_;
};

struct Admission {
    Registry registry;
    Member member;
    bool became_coordinator = false;
};

struct Removal {
    Registry registry;
    Member removed;
    LeaveReason reason = LeaveReason::quit;
    bool was_coordinator = false;
    /// Set when the departed member was coordinator; empty if nobody is left.
    std::optional<MemberId> new_coordinator;
};

/// Throws RegistryError(duplicate_id) if `id` is already a member.
Admission add_member(const Registry& registry, const MemberId& id, std::string ip,
                     std::uint16_t port, Timestamp now);

/// Throws RegistryError(unknown_member) if `id` is not a member.
Removal remove_member(const Registry& registry, const MemberId& id, LeaveReason reason);

/// (id, ip, port) for every member, in join order.
std::vector<MemberEntry> member_details(const Registry& registry);

/// Throws RegistryError(unknown_target) if `id` is not a member.
const Member& resolve_target(const Registry& registry, const MemberId& id);

/// Checks the coordinator/uniqueness/ordering invariants; used by tests.
bool invariants_hold(const Registry& registry);

}  // namespace gcs
