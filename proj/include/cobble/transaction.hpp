#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "cobble/store.hpp"
#include "cobble/timestamp.hpp"

namespace cobble {

class FaultInjector;

enum class Isolation { TCC, SI };

std::string_view to_string(Isolation iso);
// "tcc" or "si"; throws std::invalid_argument otherwise.
Isolation parse_isolation(std::string_view name);

struct CommitResult {
    enum class Status { Committed, AbortedConflict };
    Status status = Status::Committed;
    std::optional<Timestamp> ct;

    static CommitResult committed(Timestamp ct) { return {Status::Committed, ct}; }
    static CommitResult aborted_conflict() { return {Status::AbortedConflict, std::nullopt}; }
    [[nodiscard]] bool ok() const noexcept { return status == Status::Committed; }
};

struct ManagerOptions {
    Isolation isolation = Isolation::TCC;
    // Set when the store was recovered: every ct at or below it is taken.
    std::optional<Timestamp> recovered_floor;
    FaultInjector* faults = nullptr;
};

// Owns the timestamp generator and the live transactions of one store.
// Safe for concurrent use by many clients; each transaction must be driven
// by one client at a time.
class TransactionManager {
public:
    explicit TransactionManager(StoreHandle store, ManagerOptions opts = {});
    TransactionManager(const TransactionManager&) = delete;
    TransactionManager& operator=(const TransactionManager&) = delete;

    // read_st asks for reads from an older snapshot. It is raised to the
    // store's read horizon when it falls below it.
    std::string begin(std::optional<Timestamp> read_st = std::nullopt);
    Value read(const std::string& id, const Key& key);
    void update(const std::string& id, const Key& key, const Effect& eff);
    // Throws IoError when the store cannot make the commit durable; the
    // transaction is then gone, as if aborted.
    CommitResult commit(const std::string& id);
    void abort(const std::string& id);

    [[nodiscard]] TransactionDescriptor descriptor(const std::string& id) const;
    [[nodiscard]] std::size_t active() const;

    [[nodiscard]] TimestampGenerator& generator() noexcept { return gen_; }
    [[nodiscard]] const StoreHandle& store() const noexcept { return store_; }
    [[nodiscard]] Isolation isolation() const noexcept { return opts_.isolation; }

private:
    struct Coordinator {
        std::mutex mu;
        TransactionDescriptor d;
    };

    std::shared_ptr<Coordinator> get(const std::string& id) const;
    void forget(const std::string& id);

    StoreHandle store_;
    ManagerOptions opts_;
    TimestampGenerator gen_;

    mutable std::mutex txns_mu_;
    std::unordered_map<std::string, std::shared_ptr<Coordinator>> txns_;

    std::mutex si_mu_;
    std::unordered_map<Key, Timestamp> committed_writes_;  // key -> last committing ct

    std::string session_;
    std::atomic<std::uint64_t> counter_{0};
};

// Client-side handle for one transaction at a time.
class TransactionCoordinator {
public:
    enum class Phase { Idle, Active, Committed, Aborted };

    explicit TransactionCoordinator(TransactionManager& tm) : tm_(tm) {}
    ~TransactionCoordinator();

    void begin(std::optional<Timestamp> read_st = std::nullopt);
    Value read(const Key& key);
    void update(const Key& key, const Effect& eff);
    CommitResult commit();
    void abort();

    [[nodiscard]] const std::string& id() const noexcept { return id_; }
    [[nodiscard]] Phase phase() const noexcept { return phase_; }

private:
    void require_active() const;

    TransactionManager& tm_;
    std::string id_;
    Phase phase_ = Phase::Idle;
};

}  // namespace cobble
