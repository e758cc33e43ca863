#pragma once

#include <optional>
#include <span>
#include <string>

#include "cobble/effect.hpp"
#include "cobble/timestamp.hpp"

namespace cobble {

// A committed effect on one key, with the metadata needed to decide
// concurrency: T1 precedes T2 iff ct1 < st2.
struct Version {
    Timestamp ct;
    Timestamp st;
    std::string txn_id;
    Effect effect;
};

// Consolidates the visible versions of one key. `visible` must be sorted by ct
// ascending. A version starts a new sequential group when its snapshot saw the
// previous commit (st > previous ct); otherwise it joins the current concurrent
// group. Groups are collapsed and applied oldest-first. Scanning runs from the
// newest group backwards and stops at the first group that yields an
// assignment, since apply discards everything before it.
[[nodiscard]] std::optional<Effect> consolidate(std::span<const Version> visible);

}  // namespace cobble
