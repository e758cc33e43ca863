#pragma once

#include <deque>
#include <filesystem>
#include <memory>
#include <set>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "cobble/journal_record.hpp"
#include "cobble/store.hpp"

namespace cobble {

// In-memory journal: an append-only sequence of begin/update/commit/abort
// records. Lookup replays the log, keeps the updates of transactions that
// committed before read_st, orders them by visibility and consolidates.
class JournalStore final : public Store {
public:
    enum class Phase { Active, Committed, Aborted };

    struct TxnInfo {
        Timestamp st;
        std::optional<Timestamp> ct;
        Phase phase = Phase::Active;
    };

    explicit JournalStore(Window window = Window{Timestamp{0}, std::nullopt});

    void doBegin(const TransactionDescriptor& txn) override;
    [[nodiscard]] std::optional<Effect> lookup(const TransactionDescriptor& txn, const Key& key,
                                               Timestamp read_st) const override;
    void doUpdate(const TransactionDescriptor& txn, const Key& key, const Effect& eff) override;
    void doAbort(const TransactionDescriptor& txn) override;
    void doCommit(const TransactionDescriptor& txn) override;

    // Writes every record as a frame (same layout as the persistent journal).
    void persist(const std::filesystem::path& path) const override;
    // Reads the valid frame prefix and aborts unterminated transactions in
    // memory. The file is not modified.
    static std::shared_ptr<JournalStore> recover(const std::filesystem::path& path);

    [[nodiscard]] Window window() const override;
    [[nodiscard]] std::vector<Key> writtenKeys() const override;
    [[nodiscard]] std::string_view kind() const override { return "journal"; }

    // Validates lifecycle order; throws TxnStateError on violation.
    void append(const JournalRecord& rec);
    // Rejects the record the same way append() would, without appending.
    void check_append(const JournalRecord& rec) const;

    void seal(Timestamp hi);

    [[nodiscard]] std::vector<JournalRecord> records() const;
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::vector<std::string> unterminated() const;
    [[nodiscard]] std::optional<TxnInfo> txn(const std::string& id) const;
    [[nodiscard]] std::size_t committedEffects() const;
    [[nodiscard]] std::optional<Timestamp> maxCommitted() const;
    [[nodiscard]] std::optional<Timestamp> maxTimestamp() const;

private:
    void check_locked(const JournalRecord& rec) const;

    mutable std::shared_mutex mu_;
    std::deque<JournalRecord> records_;
    std::unordered_map<std::string, TxnInfo> txns_;
    std::unordered_map<std::string, std::size_t> pending_updates_;
    std::set<Key> keys_;
    Window window_;
    std::size_t committed_effects_ = 0;
    std::optional<Timestamp> max_ct_;
    std::optional<Timestamp> max_ts_;
};

}  // namespace cobble
