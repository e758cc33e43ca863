#pragma once

#include <vector>

#include "cobble/store.hpp"

namespace cobble {

struct Ministore {
    StoreHandle store;
    int read_priority = 0;  // lower is preferred for reads
};

// "Write all, read one" combinator over ministores whose windows either
// coincide (interchangeable replicas) or tile contiguously. Only the newest
// group may be open.
//
// Mutations go to every ministore of the newest group, in construction order;
// a failure part-way aborts the transaction on the members not yet reached.
// Lookup takes each group that holds history below read_st, asks its
// preferred member, and applies the partial results oldest first. That is
// only sound when no transaction straddles a group boundary, which the engine
// guarantees by rotating windows while nothing is in flight.
class ComposedStore final : public Store {
public:
    explicit ComposedStore(std::vector<Ministore> ministores);

    void doBegin(const TransactionDescriptor& txn) override;
    [[nodiscard]] std::optional<Effect> lookup(const TransactionDescriptor& txn, const Key& key,
                                               Timestamp read_st) const override;
    void doUpdate(const TransactionDescriptor& txn, const Key& key, const Effect& eff) override;
    void doAbort(const TransactionDescriptor& txn) override;
    void doCommit(const TransactionDescriptor& txn) override;

    // Persists the preferred member of each group, suffixing ".<n>" when there
    // is more than one group.
    void persist(const std::filesystem::path& path) const override;

    [[nodiscard]] Window window() const override;
    [[nodiscard]] std::vector<Key> writtenKeys() const override;
    [[nodiscard]] std::string_view kind() const override { return "composed"; }

    [[nodiscard]] const std::vector<Ministore>& ministores() const noexcept { return ministores_; }

private:
    struct Group {
        Window window;
        std::vector<std::size_t> members;  // construction order
        std::size_t preferred;
    };

    [[nodiscard]] const Group& active_group() const;

    std::vector<Ministore> ministores_;
    std::vector<Group> groups_;  // ordered by window.lo
};

}  // namespace cobble
