#pragma once

#include <memory>

#include "cobble/composed_store.hpp"
#include "cobble/map_store.hpp"
#include "cobble/persistent_journal.hpp"

namespace cobble {

// A persistent journal for durability next to an in-memory map for reads,
// composed over the same window. Commits reach the WAL before the map.
class WalMemtablePair final : public Store {
public:
    // reads_from_wal routes lookups to the journal instead of the map; both
    // must agree, and tests flip this to check it.
    static std::shared_ptr<WalMemtablePair> create(const std::filesystem::path& wal_path, Window window,
                                                   FaultInjector* faults = nullptr,
                                                   bool reads_from_wal = false);
    // Recovers the WAL (truncate + abort unterminated) and rebuilds the map
    // from its committed transactions.
    static std::shared_ptr<WalMemtablePair> recover(const std::filesystem::path& wal_path, Window window,
                                                    FaultInjector* faults = nullptr);

    void doBegin(const TransactionDescriptor& txn) override { composed_->doBegin(txn); }
    [[nodiscard]] std::optional<Effect> lookup(const TransactionDescriptor& txn, const Key& key,
                                               Timestamp read_st) const override {
        return composed_->lookup(txn, key, read_st);
    }
    void doUpdate(const TransactionDescriptor& txn, const Key& key, const Effect& eff) override {
        composed_->doUpdate(txn, key, eff);
    }
    void doAbort(const TransactionDescriptor& txn) override { composed_->doAbort(txn); }
    void doCommit(const TransactionDescriptor& txn) override { composed_->doCommit(txn); }

    // Copies the durable WAL.
    void persist(const std::filesystem::path& path) const override { wal_->persist(path); }

    [[nodiscard]] Window window() const override { return memtable_->window(); }
    [[nodiscard]] std::vector<Key> writtenKeys() const override { return memtable_->writtenKeys(); }
    [[nodiscard]] std::string_view kind() const override { return "wmp"; }

    // Fixes hi on both halves; the pair becomes read-only.
    void seal(Timestamp hi);

    [[nodiscard]] const std::shared_ptr<PersistentJournal>& wal() const noexcept { return wal_; }
    [[nodiscard]] const std::shared_ptr<MapStore>& memtable() const noexcept { return memtable_; }
    [[nodiscard]] std::size_t committedEffects() const { return memtable_->committedEffects(); }
    [[nodiscard]] std::optional<Timestamp> maxCommitted() const { return memtable_->maxCommitted(); }

private:
    WalMemtablePair(std::shared_ptr<PersistentJournal> wal, std::shared_ptr<MapStore> memtable,
                    bool reads_from_wal);

    std::shared_ptr<PersistentJournal> wal_;
    std::shared_ptr<MapStore> memtable_;
    std::unique_ptr<ComposedStore> composed_;
};

}  // namespace cobble
