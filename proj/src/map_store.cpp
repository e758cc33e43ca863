#include "cobble/map_store.hpp"

#include <algorithm>
#include <mutex>

#include "cobble/codec.hpp"
#include "cobble/file_util.hpp"

namespace cobble {

MapStore::MapStore(Window window) : window_(window) {}

void MapStore::require_active(const std::string& txn_id) const {
    if (!active_.contains(txn_id)) {
        throw TxnStateError("map: transaction " + txn_id + " is unknown or already terminated");
    }
}

void MapStore::doBegin(const TransactionDescriptor& txn) {
    std::unique_lock lock(mu_);
    if (sealed_) throw TxnStateError("map: store is sealed");
    if (!active_.insert(txn.txn_id).second) {
        throw TxnStateError("map: duplicate begin for " + txn.txn_id);
    }
}

std::optional<Effect> MapStore::lookup(const TransactionDescriptor&, const Key& key,
                                       Timestamp read_st) const {
    std::shared_lock lock(mu_);
    if (read_st < window_.lo) throw WindowViolation("map: read below window");
    auto it = per_key_.find(key);
    if (it == per_key_.end()) return std::nullopt;
    const auto& vs = it->second;
    auto end = std::lower_bound(vs.begin(), vs.end(), read_st,
                                [](const Version& v, Timestamp t) { return v.ct < t; });
    return consolidate(std::span<const Version>(vs.data(), static_cast<std::size_t>(end - vs.begin())));
}

void MapStore::doUpdate(const TransactionDescriptor& txn, const Key&, const Effect&) {
    std::shared_lock lock(mu_);
    require_active(txn.txn_id);
}

void MapStore::doAbort(const TransactionDescriptor& txn) {
    std::unique_lock lock(mu_);
    if (active_.erase(txn.txn_id) == 0) {
        throw TxnStateError("map: abort of unknown or terminated " + txn.txn_id);
    }
}

void MapStore::doCommit(const TransactionDescriptor& txn) {
    if (!txn.ct) throw TxnStateError("map: commit without a commit timestamp");
    const Timestamp ct = *txn.ct;
    std::unique_lock lock(mu_);
    require_active(txn.txn_id);
    if (!window_.contains(ct)) throw WindowViolation("map: commit timestamp outside window");
    const auto by_ct = [](const Version& v, Timestamp t) { return v.ct < t; };
    for (const auto& [key, eff] : txn.effect_buffer) {
        auto it = per_key_.find(key);
        if (it == per_key_.end()) continue;
        auto pos = std::lower_bound(it->second.begin(), it->second.end(), ct, by_ct);
        if (pos != it->second.end() && pos->ct == ct) {
            throw TxnStateError("map: duplicate commit timestamp on key " + key.str());
        }
    }
    for (const auto& [key, eff] : txn.effect_buffer) {
        auto& vs = per_key_[key];
        vs.insert(std::lower_bound(vs.begin(), vs.end(), ct, by_ct), Version{ct, txn.st, txn.txn_id, eff});
    }
    committed_effects_ += txn.effect_buffer.size();
    if (!max_ct_ || *max_ct_ < ct) max_ct_ = ct;
    active_.erase(txn.txn_id);
}

void MapStore::persist(const std::filesystem::path& path) const {
    std::shared_lock lock(mu_);
    if (!sealed_) throw TxnStateError("map: persist requires a sealed (read-only) map");
    std::vector<codec::MapFileEntry> entries;
    entries.reserve(per_key_.size());
    for (const auto& [key, vs] : per_key_) {
        codec::MapFileEntry e{key.str(), window_, {}};
        e.versions.reserve(vs.size());
        for (const auto& v : vs) e.versions.push_back({v.ct, v.st, v.effect});
        entries.push_back(std::move(e));
    }
    write_file_durably(path, codec::encode_map_file(std::move(entries)));
}

std::shared_ptr<MapStore> MapStore::recover(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("map: no such file " + path.string());
    const auto entries = codec::decode_map_file(read_file(path));
    Window w{Timestamp{0}, Timestamp{0}};
    if (!entries.empty()) w = entries.front().window;
    auto out = std::make_shared<MapStore>(w);
    for (const auto& e : entries) {
        auto& vs = out->per_key_[Key(e.key)];
        for (const auto& v : e.versions) {
            vs.push_back(Version{v.ct, v.st, "@" + std::to_string(v.ct.value), v.effect});
            if (!out->max_ct_ || *out->max_ct_ < v.ct) out->max_ct_ = v.ct;
        }
        std::sort(vs.begin(), vs.end(), [](const Version& a, const Version& b) { return a.ct < b.ct; });
        out->committed_effects_ += vs.size();
    }
    out->sealed_ = true;
    return out;
}

Window MapStore::window() const {
    std::shared_lock lock(mu_);
    return window_;
}

std::vector<Key> MapStore::writtenKeys() const {
    std::shared_lock lock(mu_);
    std::vector<Key> out;
    out.reserve(per_key_.size());
    for (const auto& [k, vs] : per_key_) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
}

void MapStore::seal(Timestamp hi) {
    std::unique_lock lock(mu_);
    if (hi < window_.lo) throw WindowViolation("map: seal below window start");
    window_.hi = hi;
    sealed_ = true;
}

bool MapStore::sealed() const {
    std::shared_lock lock(mu_);
    return sealed_;
}

std::vector<Version> MapStore::versions(const Key& key) const {
    std::shared_lock lock(mu_);
    auto it = per_key_.find(key);
    return it == per_key_.end() ? std::vector<Version>{} : it->second;
}

std::size_t MapStore::committedEffects() const {
    std::shared_lock lock(mu_);
    return committed_effects_;
}

std::optional<Timestamp> MapStore::maxCommitted() const {
    std::shared_lock lock(mu_);
    return max_ct_;
}

}  // namespace cobble
