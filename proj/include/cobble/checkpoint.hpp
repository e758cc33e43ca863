#pragma once

#include <map>
#include <memory>

#include "cobble/journal_record.hpp"
#include "cobble/store.hpp"

namespace cobble {

class FaultInjector;

// Read-only map holding one consolidated effect per key: the source's lookup
// at window.hi. Reads at or after hi see the entries, reads at or before lo
// see nothing, and anything in between is not answerable.
class Checkpoint final : public Store {
public:
    Checkpoint(std::map<Key, Effect> entries, Window window);

    // Throws TxnStateError when src is not sealed.
    static std::shared_ptr<Checkpoint> build(const Store& src);
    // Throws IoError when missing, IntegrityError when damaged or when the
    // stored window differs from `expected`. An empty file has no window of
    // its own and takes `expected`.
    static std::shared_ptr<Checkpoint> load(const std::filesystem::path& path,
                                            std::optional<Window> expected = std::nullopt);

    void doBegin(const TransactionDescriptor& txn) override;
    [[nodiscard]] std::optional<Effect> lookup(const TransactionDescriptor& txn, const Key& key,
                                               Timestamp read_st) const override;
    void doUpdate(const TransactionDescriptor& txn, const Key& key, const Effect& eff) override;
    void doAbort(const TransactionDescriptor& txn) override;
    void doCommit(const TransactionDescriptor& txn) override;

    void persist(const std::filesystem::path& path) const override { write(path); }
    void write(const std::filesystem::path& path, FaultInjector* faults = nullptr) const;

    [[nodiscard]] Window window() const override { return window_; }
    [[nodiscard]] std::vector<Key> writtenKeys() const override;
    [[nodiscard]] std::string_view kind() const override { return "checkpoint"; }

    [[nodiscard]] const std::map<Key, Effect>& entries() const noexcept { return entries_; }
    [[nodiscard]] std::optional<Effect> find(const Key& key) const;
    // (min, max) key, absent when empty.
    [[nodiscard]] std::optional<KeyRange> key_range() const;

private:
    std::map<Key, Effect> entries_;
    Window window_;
};

}  // namespace cobble
