#include "cobble/manifest.hpp"

#include <algorithm>
#include <unordered_map>

namespace cobble {

Manifest::Manifest(std::shared_ptr<PersistentJournal> journal) : journal_(std::move(journal)) {}

std::unique_ptr<Manifest> Manifest::create(const std::filesystem::path& dir, FaultInjector* faults) {
    return std::unique_ptr<Manifest>(new Manifest(PersistentJournal::create(dir / kFileName, {}, faults)));
}

std::unique_ptr<Manifest> Manifest::open(const std::filesystem::path& dir, FaultInjector* faults) {
    std::unique_ptr<Manifest> m(new Manifest(PersistentJournal::recover(dir / kFileName, {}, faults)));

    std::unordered_map<std::string, std::vector<ManifestEntry>> open_txns;
    for (const auto& rec : m->journal_->memory().records()) {
        switch (rec.kind) {
            case RecordKind::Begin:
                open_txns[rec.txn_id];
                ++m->seq_;
                m->max_ts_ = std::max(m->max_ts_, rec.ts);
                break;
            case RecordKind::Manifest:
                if (!rec.manifest) throw IntegrityError("manifest: record without payload");
                open_txns[rec.txn_id].push_back(*rec.manifest);
                break;
            case RecordKind::Commit:
                m->apply_entries(open_txns[rec.txn_id]);
                open_txns.erase(rec.txn_id);
                m->max_ts_ = std::max(m->max_ts_, rec.ts);
                break;
            case RecordKind::Abort:
                open_txns.erase(rec.txn_id);
                break;
            case RecordKind::Update:
                throw IntegrityError("manifest: unexpected update record");
        }
    }
    return m;
}

void Manifest::apply_entries(const std::vector<ManifestEntry>& entries) {
    for (const auto& e : entries) {
        if (e.action == ManifestAction::Add) {
            live_[e.path] = {order_++, e};
        } else if (live_.erase(e.path) == 0) {
            throw IntegrityError("manifest: remove of a path that is not live: " + e.path);
        }
    }
}

void Manifest::commit(const std::vector<ManifestEntry>& entries, Timestamp ts) {
    // Validate against a copy so a bad batch never reaches the file.
    auto saved = live_;
    const auto saved_order = order_;
    try {
        apply_entries(entries);
    } catch (...) {
        live_ = std::move(saved);
        order_ = saved_order;
        throw;
    }
    live_.swap(saved);
    order_ = saved_order;

    const std::string id = "m-" + std::to_string(seq_ + 1);
    std::vector<JournalRecord> recs;
    recs.reserve(entries.size() + 2);
    recs.push_back(JournalRecord::begin(id, ts));
    for (const auto& e : entries) recs.push_back(JournalRecord::manifest_entry(id, e));
    recs.push_back(JournalRecord::commit(id, ts));
    journal_->appendAndFlush(recs);

    ++seq_;
    max_ts_ = std::max(max_ts_, ts);
    apply_entries(entries);
}

std::vector<ManifestEntry> Manifest::live() const {
    std::vector<std::pair<std::uint64_t, ManifestEntry>> v;
    v.reserve(live_.size());
    for (const auto& [path, oe] : live_) v.push_back(oe);
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<ManifestEntry> out;
    out.reserve(v.size());
    for (auto& [o, e] : v) out.push_back(std::move(e));
    return out;
}

}  // namespace cobble
