#include "cobble/timestamp.hpp"

#include <string>

#include "cobble/errors.hpp"

namespace cobble {

Timestamp TimestampGenerator::next() {
    std::lock_guard lock(mu_);
    used_ = true;
    const auto ts = min_allowed_ct_.fetch_add(1, std::memory_order_acq_rel);
    running_.emplace(ts, false);
    return Timestamp{ts};
}

void TimestampGenerator::endCommitNotify(Timestamp ct) {
    std::lock_guard lock(mu_);
    auto it = running_.find(ct.value);
    if (it == running_.end()) {
        if (ct.value < min_allowed_ct_.load(std::memory_order_acquire)) return;  // already finalized
        throw TxnStateError("endCommitNotify: timestamp " + std::to_string(ct.value) +
                            " was never leased");
    }
    it->second = true;

    bool removed = false;
    for (auto cur = running_.begin(); cur != running_.end() && cur->first <= ct.value;) {
        if (cur->second) {
            cur = running_.erase(cur);
            removed = true;
        } else {
            ++cur;
        }
    }
    if (!removed) return;

    const auto bound = running_.empty() ? min_allowed_ct_.load(std::memory_order_acquire)
                                        : running_.begin()->first;
    // Monotone: pending entries are never below an already published bound.
    if (bound > max_allowed_st_.load(std::memory_order_relaxed)) {
        max_allowed_st_.store(bound, std::memory_order_release);
    }
}

void TimestampGenerator::recoverFloor(Timestamp floor) {
    std::lock_guard lock(mu_);
    if (used_) throw TxnStateError("recoverFloor on a generator that is already in use");
    used_ = true;
    min_allowed_ct_.store(floor.value + 1, std::memory_order_release);
    max_allowed_st_.store(floor.value + 1, std::memory_order_release);
}

std::size_t TimestampGenerator::pendingCount() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& [ts, committed] : running_) n += committed ? 0 : 1;
    return n;
}

}  // namespace cobble
