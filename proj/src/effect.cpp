#include "cobble/effect.hpp"

#include <stdexcept>

namespace cobble {

namespace {
std::atomic<std::uint64_t> g_collapses{0};
}

std::ostream& operator<<(std::ostream& os, const Effect& e) {
    os << "(";
    if (e.base) {
        os << "base=" << *e.base;
    } else {
        os << "absent";
    }
    return os << ", delta=" << e.delta << ")";
}

Effect apply(const Effect& first, const Effect& second) noexcept {
    if (second.base) return second;
    return Effect{first.base, wrapping_add(first.delta, second.delta)};
}

Value evaluate(const Effect& e, Value pre) noexcept {
    return wrapping_add(e.base.value_or(pre), e.delta);
}

ConcurrentSet::ConcurrentSet(std::initializer_list<StampedEffect> members) {
    for (const auto& m : members) members_.insert(m);
}

void ConcurrentSet::insert(StampedEffect member) { members_.insert(std::move(member)); }

bool operator==(const ConcurrentSet& a, const ConcurrentSet& b) {
    if (a.size() != b.size()) return false;
    auto it = b.members_.begin();
    for (const auto& m : a.members_) {
        if (m.txn_id != it->txn_id || m.ct != it->ct || m.effect != it->effect) return false;
        ++it;
    }
    return true;
}

ConcurrentSet mergeSets(const ConcurrentSet& a, const ConcurrentSet& b) {
    ConcurrentSet out = a;
    for (const auto& m : b) out.insert(m);
    return out;
}

void CollapseAccumulator::add(Timestamp ct, const Effect& e) noexcept {
    ++count_;
    if (!e.base) {
        increments_ = wrapping_add(increments_, e.delta);
        return;
    }
    if (!winner_ct_ || *winner_ct_ < ct) {
        winner_ct_ = ct;
        winner_ = e;
    }
}

Effect CollapseAccumulator::result() const noexcept {
    if (count_ > 1) g_collapses.fetch_add(1, std::memory_order_relaxed);
    if (!winner_ct_) return Effect::incr(increments_);
    return Effect{winner_.base, wrapping_add(winner_.delta, increments_)};
}

Effect collapse(const ConcurrentSet& s) {
    if (s.empty()) throw std::invalid_argument("collapse of an empty concurrent set");
    CollapseAccumulator acc;
    for (const auto& m : s) acc.add(m.ct, m.effect);
    return acc.result();
}

std::uint64_t collapse_invocations() noexcept {
    return g_collapses.load(std::memory_order_relaxed);
}

}  // namespace cobble
