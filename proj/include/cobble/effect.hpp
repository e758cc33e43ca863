#pragma once

#include <atomic>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <set>
#include <string>

#include "cobble/timestamp.hpp"

namespace cobble {

using Value = std::int64_t;

// Two's-complement wrap-around addition.
constexpr Value wrapping_add(Value a, Value b) noexcept {
    return static_cast<Value>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}

// An update as a function from pre-value to post-value, in canonical form:
// an optional assignment followed by an increment.
//   assign(v)  == (v, 0)
//   incr(n)    == (absent, n)
//   identity   == (absent, 0)
struct Effect {
    std::optional<Value> base;
    std::int64_t delta = 0;

    static constexpr Effect identity() noexcept { return {}; }
    static constexpr Effect assign(Value v) noexcept { return {v, 0}; }
    static constexpr Effect incr(std::int64_t n) noexcept { return {std::nullopt, n}; }

    [[nodiscard]] bool is_assignment() const noexcept { return base.has_value(); }
    [[nodiscard]] bool is_identity() const noexcept { return !base && delta == 0; }

    friend bool operator==(const Effect&, const Effect&) = default;
};

std::ostream& operator<<(std::ostream& os, const Effect& e);

// Sequential composition: `first` happens, then `second`. Associative, with
// identity() neutral on both sides. A later assignment absorbs earlier history.
[[nodiscard]] Effect apply(const Effect& first, const Effect& second) noexcept;

// Keys never written evaluate from 0.
[[nodiscard]] Value evaluate(const Effect& e, Value pre = 0) noexcept;

struct StampedEffect {
    Timestamp ct;
    std::string txn_id;
    Effect effect;
};

// A set of mutually concurrent effects, keyed by (txn_id, ct). Union is the
// merge carrier, so merge is associative, commutative and idempotent exactly.
class ConcurrentSet {
public:
    ConcurrentSet() = default;
    ConcurrentSet(std::initializer_list<StampedEffect> members);

    void insert(StampedEffect member);

    [[nodiscard]] bool empty() const noexcept { return members_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
    [[nodiscard]] auto begin() const { return members_.begin(); }
    [[nodiscard]] auto end() const { return members_.end(); }

    friend bool operator==(const ConcurrentSet& a, const ConcurrentSet& b);

private:
    struct ByIdentity {
        bool operator()(const StampedEffect& a, const StampedEffect& b) const {
            if (a.txn_id != b.txn_id) return a.txn_id < b.txn_id;
            return a.ct < b.ct;
        }
    };
    std::set<StampedEffect, ByIdentity> members_;
};

[[nodiscard]] ConcurrentSet mergeSets(const ConcurrentSet& a, const ConcurrentSet& b);

// Folds concurrent members into one effect. Assignments resolve
// last-writer-wins by ct; every concurrent pure increment survives.
class CollapseAccumulator {
public:
    void add(Timestamp ct, const Effect& e) noexcept;
    [[nodiscard]] bool empty() const noexcept { return count_ == 0; }
    [[nodiscard]] Effect result() const noexcept;

private:
    std::size_t count_ = 0;
    std::int64_t increments_ = 0;  // sum of deltas of base-less members
    std::optional<Timestamp> winner_ct_;
    Effect winner_;
};

// Throws std::invalid_argument on an empty set.
[[nodiscard]] Effect collapse(const ConcurrentSet& s);

// Number of multi-member collapses performed process-wide. Compaction must not
// move this counter.
[[nodiscard]] std::uint64_t collapse_invocations() noexcept;

}  // namespace cobble
