#pragma once

#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

#include "cobble/journal_store.hpp"

namespace cobble {

class FaultInjector;

// Journal backed by a sequential file of CRC-framed records.
//
// Records are buffered in memory and reach the file at flush points; doCommit
// appends its Commit frame and flushes (write + fdatasync) before returning.
// The in-memory mirror only learns about the commit after the flush succeeds,
// so a failed flush never becomes visible. Concurrent commits share one
// fdatasync. After any I/O failure the journal is marked failed and every
// later operation throws IoError.
//
// Destruction never flushes: a destroyed journal behaves like a crashed one.
class PersistentJournal final : public Store {
public:
    // Creates (truncating) a new journal file.
    static std::shared_ptr<PersistentJournal> create(const std::filesystem::path& path,
                                                     Window window = {Timestamp{0}, std::nullopt},
                                                     FaultInjector* faults = nullptr);

    // Scans frames from offset 0, truncates the file to the valid prefix and
    // appends (and flushes) an Abort for every unterminated transaction.
    // Idempotent at the byte level.
    static std::shared_ptr<PersistentJournal> recover(const std::filesystem::path& path,
                                                      Window window = {Timestamp{0}, std::nullopt},
                                                      FaultInjector* faults = nullptr);

    ~PersistentJournal() override;
    PersistentJournal(const PersistentJournal&) = delete;
    PersistentJournal& operator=(const PersistentJournal&) = delete;

    void doBegin(const TransactionDescriptor& txn) override;
    [[nodiscard]] std::optional<Effect> lookup(const TransactionDescriptor& txn, const Key& key,
                                               Timestamp read_st) const override;
    void doUpdate(const TransactionDescriptor& txn, const Key& key, const Effect& eff) override;
    void doAbort(const TransactionDescriptor& txn) override;
    void doCommit(const TransactionDescriptor& txn) override;

    // Copies the durable journal to `path`.
    void persist(const std::filesystem::path& path) const override;

    [[nodiscard]] Window window() const override { return mem_.window(); }
    [[nodiscard]] std::vector<Key> writtenKeys() const override { return mem_.writtenKeys(); }
    [[nodiscard]] std::string_view kind() const override { return "pjournal"; }

    // Buffers one record; it becomes durable at the next flush.
    void appendRecord(const JournalRecord& rec);
    // Appends a batch (ending in its Commit) and flushes it as one unit.
    void appendAndFlush(const std::vector<JournalRecord>& recs);
    void flush();
    // Flushes pending records and closes the file.
    void close();

    void seal(Timestamp hi) { mem_.seal(hi); }

    [[nodiscard]] const JournalStore& memory() const noexcept { return mem_; }
    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    [[nodiscard]] std::uint64_t durableSize() const;
    [[nodiscard]] bool failed() const;

private:
    PersistentJournal(std::filesystem::path path, int fd, Window window, FaultInjector* faults);

    void check_usable() const;
    void flush_until(std::unique_lock<std::mutex>& lock, std::uint64_t target);
    void write_batch(const std::string& batch);

    std::filesystem::path path_;
    FaultInjector* faults_;
    mutable std::mutex io_mu_;
    int fd_ = -1;
    std::condition_variable flushed_;
    std::string pending_;
    std::uint64_t in_flight_ = 0;  // bytes being written by the current flush leader
    std::uint64_t durable_size_ = 0;
    bool failed_ = false;
    JournalStore mem_;
};

}  // namespace cobble
