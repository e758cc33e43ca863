#include "cobble/consolidate.hpp"

#include <vector>

namespace cobble {

std::optional<Effect> consolidate(std::span<const Version> visible) {
    if (visible.empty()) return std::nullopt;

    // Collapsed groups, newest first.
    std::vector<Effect> groups;
    std::size_t end = visible.size();  // exclusive end of the current group
    while (end > 0) {
        std::size_t start = end - 1;
        while (start > 0 && !(visible[start].st > visible[start - 1].ct)) --start;

        CollapseAccumulator acc;
        for (std::size_t i = start; i < end; ++i) acc.add(visible[i].ct, visible[i].effect);
        groups.push_back(acc.result());
        if (groups.back().is_assignment()) break;
        end = start;
    }

    Effect out = Effect::identity();
    for (auto it = groups.rbegin(); it != groups.rend(); ++it) out = apply(out, *it);
    return out;
}

}  // namespace cobble
