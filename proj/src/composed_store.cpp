#include "cobble/composed_store.hpp"

#include <algorithm>
#include <set>

namespace cobble {

ComposedStore::ComposedStore(std::vector<Ministore> ministores) : ministores_(std::move(ministores)) {
    if (ministores_.empty()) throw std::invalid_argument("composed store needs a ministore");
    for (std::size_t i = 0; i < ministores_.size(); ++i) {
        if (!ministores_[i].store) throw std::invalid_argument("composed store: null ministore");
        const Window w = ministores_[i].store->window();
        auto g = std::find_if(groups_.begin(), groups_.end(),
                              [&](const Group& x) { return x.window == w; });
        if (g == groups_.end()) {
            groups_.push_back(Group{w, {i}, i});
        } else {
            g->members.push_back(i);
            if (ministores_[i].read_priority < ministores_[g->preferred].read_priority) g->preferred = i;
        }
    }
    std::sort(groups_.begin(), groups_.end(),
              [](const Group& a, const Group& b) { return a.window.lo < b.window.lo; });
    for (std::size_t i = 0; i < groups_.size(); ++i) {
        const auto& w = groups_[i].window;
        if (w.hi && *w.hi < w.lo) throw std::invalid_argument("composed store: inverted window");
        if (i + 1 == groups_.size()) break;
        if (!w.hi) throw std::invalid_argument("composed store: only the newest window may be open");
        if (*w.hi != groups_[i + 1].window.lo) {
            throw std::invalid_argument("composed store: windows must tile without gaps or overlap");
        }
    }
}

const ComposedStore::Group& ComposedStore::active_group() const { return groups_.back(); }

void ComposedStore::doBegin(const TransactionDescriptor& txn) {
    const auto& g = active_group();
    for (std::size_t n = 0; n < g.members.size(); ++n) {
        try {
            ministores_[g.members[n]].store->doBegin(txn);
        } catch (...) {
            for (std::size_t j = 0; j < n; ++j) {
                try {
                    ministores_[g.members[j]].store->doAbort(txn);
                } catch (const Error&) {
                }
            }
            throw;
        }
    }
}

std::optional<Effect> ComposedStore::lookup(const TransactionDescriptor& txn, const Key& key,
                                            Timestamp read_st) const {
    if (read_st < groups_.front().window.lo) throw WindowViolation("composed: read below window");
    std::optional<Effect> out;
    for (const auto& g : groups_) {
        if (!(g.window.lo < read_st)) break;
        auto part = ministores_[g.preferred].store->lookup(txn, key, read_st);
        if (!part) continue;
        out = out ? apply(*out, *part) : *part;
    }
    return out;
}

void ComposedStore::doUpdate(const TransactionDescriptor& txn, const Key& key, const Effect& eff) {
    for (auto i : active_group().members) ministores_[i].store->doUpdate(txn, key, eff);
}

void ComposedStore::doAbort(const TransactionDescriptor& txn) {
    std::exception_ptr first;
    for (auto i : active_group().members) {
        try {
            ministores_[i].store->doAbort(txn);
        } catch (...) {
            if (!first) first = std::current_exception();
        }
    }
    if (first) std::rethrow_exception(first);
}

void ComposedStore::doCommit(const TransactionDescriptor& txn) {
    if (!txn.ct) throw TxnStateError("composed: commit without a commit timestamp");
    const auto& g = active_group();
    if (!g.window.contains(*txn.ct)) throw WindowViolation("composed: commit timestamp outside window");
    for (std::size_t n = 0; n < g.members.size(); ++n) {
        try {
            ministores_[g.members[n]].store->doCommit(txn);
        } catch (...) {
            for (std::size_t j = n + 1; j < g.members.size(); ++j) {
                try {
                    ministores_[g.members[j]].store->doAbort(txn);
                } catch (const Error&) {
                }
            }
            throw;
        }
    }
}

void ComposedStore::persist(const std::filesystem::path& path) const {
    if (groups_.size() == 1) {
        ministores_[groups_.front().preferred].store->persist(path);
        return;
    }
    for (std::size_t i = 0; i < groups_.size(); ++i) {
        auto p = path;
        p += "." + std::to_string(i);
        ministores_[groups_[i].preferred].store->persist(p);
    }
}

Window ComposedStore::window() const {
    return Window{groups_.front().window.lo, groups_.back().window.hi};
}

std::vector<Key> ComposedStore::writtenKeys() const {
    std::set<Key> keys;
    for (const auto& g : groups_) {
        for (auto& k : ministores_[g.preferred].store->writtenKeys()) keys.insert(std::move(k));
    }
    return {keys.begin(), keys.end()};
}

}  // namespace cobble
