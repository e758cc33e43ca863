#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <vector>

#include "cobble/journal_record.hpp"
#include "cobble/persistent_journal.hpp"

namespace cobble {

// Crash-tolerant record of which files make up the engine. Each change is one
// journal transaction of Manifest records; only committed transactions count.
class Manifest {
public:
    static constexpr const char* kFileName = "MANIFEST";

    static std::unique_ptr<Manifest> create(const std::filesystem::path& dir,
                                            FaultInjector* faults = nullptr);
    // Recovers the journal and replays its committed prefix. Throws
    // IntegrityError when a committed Remove names a path that is not live.
    static std::unique_ptr<Manifest> open(const std::filesystem::path& dir,
                                          FaultInjector* faults = nullptr);

    // Appends and flushes one transaction with st = ct = ts.
    void commit(const std::vector<ManifestEntry>& entries, Timestamp ts);

    // Live paths with the entry that added them, in the order they were added.
    [[nodiscard]] std::vector<ManifestEntry> live() const;
    [[nodiscard]] Timestamp max_timestamp() const { return max_ts_; }
    [[nodiscard]] std::size_t transactions() const noexcept { return seq_; }
    [[nodiscard]] const PersistentJournal& journal() const noexcept { return *journal_; }

private:
    explicit Manifest(std::shared_ptr<PersistentJournal> journal);
    void apply_entries(const std::vector<ManifestEntry>& entries);

    std::shared_ptr<PersistentJournal> journal_;
    std::map<std::string, std::pair<std::uint64_t, ManifestEntry>> live_;  // path -> (order, entry)
    std::uint64_t order_ = 0;
    std::size_t seq_ = 0;
    Timestamp max_ts_{0};
};

}  // namespace cobble
