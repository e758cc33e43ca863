#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "cobble/checkpoint.hpp"
#include "cobble/manifest.hpp"
#include "cobble/wal_memtable_pair.hpp"

namespace cobble {

struct EngineConfig {
    int max_levels = 4;
    std::size_t live_capacity = 4;
    std::size_t wmp_rotate_effects = 4096;
    std::vector<std::size_t> level_capacity;  // empty entries fall back to 4 * 10^k

    [[nodiscard]] std::size_t capacity(int level) const;
    // Throws std::invalid_argument.
    void validate() const;
};

struct WmpRef {
    std::string path;  // relative to the engine directory
    std::shared_ptr<WalMemtablePair> store;
};

struct CheckpointRef {
    std::string path;
    std::shared_ptr<Checkpoint> store;
    std::optional<KeyRange> range;
};

// Immutable view of the engine's stores. Replaced wholesale after each
// MANIFEST commit, so readers holding one never see a half-applied change.
struct Layout {
    std::vector<WmpRef> live;                        // oldest first; back() takes new work
    std::vector<std::vector<CheckpointRef>> levels;  // L0 sharded by time, L1+ by key
    Timestamp horizon{0};                            // reads below this are rejected
};

// The levelled engine. Transactions are pinned to the newest live pair at
// begin; the pair is sealed and replaced only when no transaction is pinned.
// Rotation and compaction run synchronously at the end of the commit (or
// abort) that leaves the engine with no pinned transactions.
class CobbleEngine final : public Store {
public:
    static constexpr int kRecoverySteps = 6;

    // Creates a fresh engine in `dir`, or recovers the one found there.
    static std::shared_ptr<CobbleEngine> open(const std::filesystem::path& dir, EngineConfig cfg = {},
                                              FaultInjector* faults = nullptr);

    ~CobbleEngine() override;

    void doBegin(const TransactionDescriptor& txn) override;
    [[nodiscard]] std::optional<Effect> lookup(const TransactionDescriptor& txn, const Key& key,
                                               Timestamp read_st) const override;
    void doUpdate(const TransactionDescriptor& txn, const Key& key, const Effect& eff) override;
    void doAbort(const TransactionDescriptor& txn) override;
    void doCommit(const TransactionDescriptor& txn) override;

    // Writes one checkpoint file holding every key at the latest commit.
    void persist(const std::filesystem::path& path) const override;

    [[nodiscard]] Window window() const override { return Window{Timestamp{0}, std::nullopt}; }
    [[nodiscard]] std::vector<Key> writtenKeys() const override;
    [[nodiscard]] std::string_view kind() const override { return "cobble"; }
    [[nodiscard]] Timestamp readHorizon() const override;
    // Holds new transactions back while a rotation waits for pinned ones to
    // drain. Gives up after a short timeout.
    void admit() override;

    // Levelled lookup that also reports how many ministores it probed.
    [[nodiscard]] std::optional<Effect> lookup_counted(const Key& key, Timestamp read_st,
                                                       std::size_t& probes) const;

    // Runs whatever compaction the capacities and the snapshot gate allow.
    void compact();
    // Seals the newest pair and pushes everything down to the bottom level.
    // Requires that no transaction is pinned.
    void compact_full();
    // Seals the newest pair when it holds commits and nothing is pinned.
    bool rotate();

    [[nodiscard]] std::shared_ptr<const Layout> layout() const;
    [[nodiscard]] std::string describe() const;
    [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }
    // Every ct at or below this was durable before the engine was reopened.
    [[nodiscard]] std::optional<Timestamp> recovered_floor() const noexcept { return recovered_floor_; }
    [[nodiscard]] std::uint64_t probes() const noexcept { return probes_.load(); }
    [[nodiscard]] std::size_t maintenance_errors() const noexcept { return maintenance_errors_.load(); }
    [[nodiscard]] std::size_t pinned() const;
    [[nodiscard]] const EngineConfig& config() const noexcept { return cfg_; }

private:
    struct Pin {
        std::shared_ptr<WalMemtablePair> wmp;
        Timestamp read_snapshot;
    };

    CobbleEngine(std::filesystem::path dir, EngineConfig cfg, FaultInjector* faults);

    void init_fresh();
    void recover();
    void remove_unreferenced(const Layout& layout) const;

    std::shared_ptr<WalMemtablePair> pinned_store(const std::string& txn_id) const;
    void finish(const std::string& txn_id, std::optional<Timestamp> ct);
    void maintain();
    bool rotate_locked();
    void compact_locked(bool full);
    bool compact_live(bool full);
    bool compact_level(int level, bool full);
    [[nodiscard]] bool needs_compaction(const Layout& layout) const;
    void delete_files(const std::vector<std::string>& paths) const;
    std::string shard_path(int level, Window w);

    std::filesystem::path dir_;
    EngineConfig cfg_;
    FaultInjector* faults_;
    std::optional<Timestamp> recovered_floor_;

    std::mutex maint_mu_;  // rotation and compaction; guards manifest_ and shard_seq_
    std::unique_ptr<Manifest> manifest_;
    std::uint64_t shard_seq_ = 0;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::shared_ptr<const Layout> layout_;
    std::unordered_map<std::string, Pin> pinned_;
    bool rotation_pending_ = false;
    Timestamp pending_horizon_{0};
    std::optional<Timestamp> last_ct_;
    Timestamp max_ts_{0};

    mutable std::atomic<std::uint64_t> probes_{0};
    std::atomic<std::size_t> maintenance_errors_{0};
};

}  // namespace cobble
