#pragma once

#include <filesystem>
#include <memory>
#include <shared_mutex>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cobble/consolidate.hpp"
#include "cobble/store.hpp"

namespace cobble {

// In-memory map store: key -> versions sorted by ct. Updates stay private to
// the transaction until doCommit pushes the whole effect buffer at once.
//
// Reads outside [window.lo, ...) are rejected; reads past a sealed hi return
// this store's slice of history, which is what composed stores need.
class MapStore final : public Store {
public:
    explicit MapStore(Window window = Window{Timestamp{0}, std::nullopt});

    void doBegin(const TransactionDescriptor& txn) override;
    [[nodiscard]] std::optional<Effect> lookup(const TransactionDescriptor& txn, const Key& key,
                                               Timestamp read_st) const override;
    void doUpdate(const TransactionDescriptor& txn, const Key& key, const Effect& eff) override;
    void doAbort(const TransactionDescriptor& txn) override;
    void doCommit(const TransactionDescriptor& txn) override;

    // Requires the map to be sealed.
    void persist(const std::filesystem::path& path) const override;
    // Throws IoError when the file is missing, IntegrityError on checksum
    // mismatch. The result is sealed.
    static std::shared_ptr<MapStore> recover(const std::filesystem::path& path);

    [[nodiscard]] Window window() const override;
    [[nodiscard]] std::vector<Key> writtenKeys() const override;
    [[nodiscard]] std::string_view kind() const override { return "map"; }

    // Fixes window.hi; afterwards the map is read-only.
    void seal(Timestamp hi);
    [[nodiscard]] bool sealed() const;

    [[nodiscard]] std::vector<Version> versions(const Key& key) const;
    [[nodiscard]] std::size_t committedEffects() const;
    [[nodiscard]] std::optional<Timestamp> maxCommitted() const;

private:
    void require_active(const std::string& txn_id) const;

    mutable std::shared_mutex mu_;
    std::unordered_map<Key, std::vector<Version>> per_key_;
    std::unordered_set<std::string> active_;
    Window window_;
    bool sealed_ = false;
    std::size_t committed_effects_ = 0;
    std::optional<Timestamp> max_ct_;
};

}  // namespace cobble
