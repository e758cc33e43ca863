#include "cobble/journal_store.hpp"

#include <algorithm>
#include <mutex>

#include "cobble/codec.hpp"
#include "cobble/consolidate.hpp"
#include "cobble/file_util.hpp"

namespace cobble {

JournalStore::JournalStore(Window window) : window_(window) {}

void JournalStore::check_locked(const JournalRecord& rec) const {
    auto it = txns_.find(rec.txn_id);
    if (rec.kind == RecordKind::Begin) {
        if (it != txns_.end()) throw TxnStateError("journal: duplicate begin for " + rec.txn_id);
        return;
    }
    if (it == txns_.end() || it->second.phase != Phase::Active) {
        throw TxnStateError("journal: transaction " + rec.txn_id + " is unknown or terminated");
    }
    if (rec.kind == RecordKind::Update && (!rec.key || !rec.effect)) {
        throw TxnStateError("journal: update record without key/effect");
    }
    if (rec.kind == RecordKind::Commit && window_.hi && !window_.contains(rec.ts)) {
        throw WindowViolation("journal: commit timestamp outside window");
    }
}

void JournalStore::check_append(const JournalRecord& rec) const {
    std::shared_lock lock(mu_);
    check_locked(rec);
}

void JournalStore::append(const JournalRecord& rec) {
    std::unique_lock lock(mu_);
    check_locked(rec);
    switch (rec.kind) {
        case RecordKind::Begin:
            txns_.emplace(rec.txn_id, TxnInfo{rec.ts, std::nullopt, Phase::Active});
            break;
        case RecordKind::Update:
            keys_.insert(*rec.key);
            ++pending_updates_[rec.txn_id];
            break;
        case RecordKind::Commit: {
            auto& info = txns_.at(rec.txn_id);
            info.ct = rec.ts;
            info.phase = Phase::Committed;
            if (auto p = pending_updates_.find(rec.txn_id); p != pending_updates_.end()) {
                committed_effects_ += p->second;
                pending_updates_.erase(p);
            }
            if (!max_ct_ || *max_ct_ < rec.ts) max_ct_ = rec.ts;
            break;
        }
        case RecordKind::Abort:
            txns_.at(rec.txn_id).phase = Phase::Aborted;
            pending_updates_.erase(rec.txn_id);
            break;
        case RecordKind::Manifest:
            break;
    }
    if (rec.kind == RecordKind::Begin || rec.kind == RecordKind::Commit) {
        if (!max_ts_ || *max_ts_ < rec.ts) max_ts_ = rec.ts;
    }
    records_.push_back(rec);
}

void JournalStore::doBegin(const TransactionDescriptor& txn) {
    append(JournalRecord::begin(txn.txn_id, txn.st));
}

std::optional<Effect> JournalStore::lookup(const TransactionDescriptor&, const Key& key,
                                           Timestamp read_st) const {
    std::shared_lock lock(mu_);
    if (read_st < window_.lo) throw WindowViolation("journal: read below window");

    // Replay: fold each visible transaction's updates on `key` in log order.
    std::unordered_map<std::string, std::size_t> slot;
    std::vector<Version> visible;
    for (const auto& rec : records_) {
        if (rec.kind != RecordKind::Update || *rec.key != key) continue;
        const auto& info = txns_.at(rec.txn_id);
        if (info.phase != Phase::Committed || !(*info.ct < read_st)) continue;
        auto [it, fresh] = slot.try_emplace(rec.txn_id, visible.size());
        if (fresh) {
            visible.push_back(Version{*info.ct, info.st, rec.txn_id, *rec.effect});
        } else {
            auto& v = visible[it->second];
            v.effect = apply(v.effect, *rec.effect);
        }
    }
    std::sort(visible.begin(), visible.end(),
              [](const Version& a, const Version& b) { return a.ct < b.ct; });
    return consolidate(visible);
}

void JournalStore::doUpdate(const TransactionDescriptor& txn, const Key& key, const Effect& eff) {
    append(JournalRecord::update(txn.txn_id, key, eff));
}

void JournalStore::doAbort(const TransactionDescriptor& txn) {
    append(JournalRecord::abort(txn.txn_id));
}

void JournalStore::doCommit(const TransactionDescriptor& txn) {
    if (!txn.ct) throw TxnStateError("journal: commit without a commit timestamp");
    append(JournalRecord::commit(txn.txn_id, *txn.ct));
}

void JournalStore::persist(const std::filesystem::path& path) const {
    std::string bytes;
    {
        std::shared_lock lock(mu_);
        for (const auto& rec : records_) bytes += codec::encode_frame(codec::encode_record(rec));
    }
    write_file_durably(path, bytes);
}

std::shared_ptr<JournalStore> JournalStore::recover(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("journal: no such file " + path.string());
    const auto bytes = read_file(path);
    const auto scan = codec::scan_frames(bytes);
    auto out = std::make_shared<JournalStore>();
    for (const auto& f : scan.frames) {
        JournalRecord rec;
        try {
            rec = codec::decode_record(f.payload);
            out->check_append(rec);
        } catch (const Error&) {
            break;  // the valid prefix ends here
        }
        out->append(rec);
    }
    for (const auto& id : out->unterminated()) out->append(JournalRecord::abort(id));
    return out;
}

Window JournalStore::window() const {
    std::shared_lock lock(mu_);
    return window_;
}

std::vector<Key> JournalStore::writtenKeys() const {
    std::shared_lock lock(mu_);
    return {keys_.begin(), keys_.end()};
}

void JournalStore::seal(Timestamp hi) {
    std::unique_lock lock(mu_);
    if (hi < window_.lo) throw WindowViolation("journal: seal below window start");
    window_.hi = hi;
}

std::vector<JournalRecord> JournalStore::records() const {
    std::shared_lock lock(mu_);
    return {records_.begin(), records_.end()};
}

std::size_t JournalStore::size() const {
    std::shared_lock lock(mu_);
    return records_.size();
}

std::vector<std::string> JournalStore::unterminated() const {
    std::shared_lock lock(mu_);
    // Log order keeps recovery output deterministic.
    std::vector<std::string> out;
    for (const auto& rec : records_) {
        if (rec.kind == RecordKind::Begin && txns_.at(rec.txn_id).phase == Phase::Active) {
            out.push_back(rec.txn_id);
        }
    }
    return out;
}

std::optional<JournalStore::TxnInfo> JournalStore::txn(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = txns_.find(id);
    if (it == txns_.end()) return std::nullopt;
    return it->second;
}

std::size_t JournalStore::committedEffects() const {
    std::shared_lock lock(mu_);
    return committed_effects_;
}

std::optional<Timestamp> JournalStore::maxCommitted() const {
    std::shared_lock lock(mu_);
    return max_ct_;
}

std::optional<Timestamp> JournalStore::maxTimestamp() const {
    std::shared_lock lock(mu_);
    return max_ts_;
}

}  // namespace cobble
