#pragma once

#include <atomic>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>

namespace cobble {

// Logical instant. Snapshot, commit and read timestamps all share this type;
// a snapshot at t observes exactly the commits with ct < t.
struct Timestamp {
    std::uint64_t value = 0;

    constexpr Timestamp() = default;
    constexpr explicit Timestamp(std::uint64_t v) : value(v) {}

    [[nodiscard]] constexpr Timestamp next() const { return Timestamp{value + 1}; }
    [[nodiscard]] static constexpr Timestamp max() {
        return Timestamp{std::numeric_limits<std::uint64_t>::max()};
    }

    friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
};

inline std::ostream& operator<<(std::ostream& os, Timestamp t) { return os << t.value; }

// Central commit/snapshot timestamp authority.
//
// next() leases a unique commit timestamp. endCommitNotify(ct) is called once
// the commit is durable; it lazily advances the snapshot bound past every
// leased timestamp that is finalized, but never past one that is still pending.
// Hence peekSnapshot() never exposes a partially-flushed timestamp.
//
// Invariant: max_allowed_st <= min_allowed_ct, with equality only when nothing
// is pending. Visibility is strict (ct < st), so equality preserves noInversion.
class TimestampGenerator {
public:
    TimestampGenerator() = default;
    TimestampGenerator(const TimestampGenerator&) = delete;
    TimestampGenerator& operator=(const TimestampGenerator&) = delete;

    // Never waits on I/O; the critical section only covers the counter bump and
    // the pending-set insertion, which must be atomic with respect to notify.
    Timestamp next();

    [[nodiscard]] Timestamp peekSnapshot() const {
        return Timestamp{max_allowed_st_.load(std::memory_order_acquire)};
    }

    // Throws TxnStateError when ct was never leased. Re-notifying a finalized ct
    // is a no-op.
    void endCommitNotify(Timestamp ct);

    // Recovery: every ct <= floor is durable. Only valid on a fresh generator.
    void recoverFloor(Timestamp floor);

    [[nodiscard]] Timestamp minAllowedCommit() const {
        return Timestamp{min_allowed_ct_.load(std::memory_order_acquire)};
    }
    [[nodiscard]] std::size_t pendingCount() const;

private:
    std::atomic<std::uint64_t> min_allowed_ct_{0};
    std::atomic<std::uint64_t> max_allowed_st_{0};
    mutable std::mutex mu_;
    std::map<std::uint64_t, bool> running_;  // ts -> committed
    bool used_ = false;
};

}  // namespace cobble

template <>
struct std::hash<cobble::Timestamp> {
    std::size_t operator()(cobble::Timestamp t) const noexcept {
        return std::hash<std::uint64_t>{}(t.value);
    }
};
