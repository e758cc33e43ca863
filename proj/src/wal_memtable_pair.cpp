#include "cobble/wal_memtable_pair.hpp"

#include <unordered_map>

namespace cobble {

WalMemtablePair::WalMemtablePair(std::shared_ptr<PersistentJournal> wal,
                                 std::shared_ptr<MapStore> memtable, bool reads_from_wal)
    : wal_(std::move(wal)), memtable_(std::move(memtable)) {
    composed_ = std::make_unique<ComposedStore>(std::vector<Ministore>{
        {wal_, reads_from_wal ? 0 : 1},
        {memtable_, reads_from_wal ? 1 : 0},
    });
}

std::shared_ptr<WalMemtablePair> WalMemtablePair::create(const std::filesystem::path& wal_path,
                                                         Window window, FaultInjector* faults,
                                                         bool reads_from_wal) {
    auto wal = PersistentJournal::create(wal_path, window, faults);
    auto mem = std::make_shared<MapStore>(window);
    return std::shared_ptr<WalMemtablePair>(new WalMemtablePair(wal, mem, reads_from_wal));
}

std::shared_ptr<WalMemtablePair> WalMemtablePair::recover(const std::filesystem::path& wal_path,
                                                          Window window, FaultInjector* faults) {
    auto wal = PersistentJournal::recover(wal_path, window, faults);
    auto mem = std::make_shared<MapStore>(window);

    std::unordered_map<std::string, TransactionDescriptor> open;
    for (const auto& rec : wal->memory().records()) {
        switch (rec.kind) {
            case RecordKind::Begin: {
                TransactionDescriptor d;
                d.txn_id = rec.txn_id;
                d.st = rec.ts;
                open.emplace(rec.txn_id, std::move(d));
                break;
            }
            case RecordKind::Update: {
                auto& d = open.at(rec.txn_id);
                auto [it, fresh] = d.effect_buffer.try_emplace(*rec.key, *rec.effect);
                if (!fresh) it->second = apply(it->second, *rec.effect);
                break;
            }
            case RecordKind::Commit: {
                auto& d = open.at(rec.txn_id);
                d.ct = rec.ts;
                mem->doBegin(d);
                mem->doCommit(d);
                open.erase(rec.txn_id);
                break;
            }
            case RecordKind::Abort:
                open.erase(rec.txn_id);
                break;
            case RecordKind::Manifest:
                break;
        }
    }
    return std::shared_ptr<WalMemtablePair>(new WalMemtablePair(wal, mem, false));
}

void WalMemtablePair::seal(Timestamp hi) {
    wal_->seal(hi);
    memtable_->seal(hi);
}

}  // namespace cobble
