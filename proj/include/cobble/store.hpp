#pragma once

#include <compare>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cobble/effect.hpp"
#include "cobble/errors.hpp"
#include "cobble/timestamp.hpp"

namespace cobble {

inline constexpr std::size_t kMaxKeyBytes = 1024;

// Non-empty UTF-8 byte string of at most kMaxKeyBytes, no NUL.
class Key {
public:
    explicit Key(std::string bytes);
    Key(const char* bytes) : Key(std::string(bytes)) {}

    [[nodiscard]] const std::string& str() const noexcept { return bytes_; }

    friend auto operator<=>(const Key&, const Key&) = default;
    friend bool operator==(const Key&, const Key&) = default;

private:
    std::string bytes_;
};

inline std::ostream& operator<<(std::ostream& os, const Key& k) { return os << k.str(); }

// Closed-open interval [lo, hi). An absent hi means the store is still
// receiving commits.
struct Window {
    Timestamp lo;
    std::optional<Timestamp> hi;

    [[nodiscard]] bool is_open() const noexcept { return !hi.has_value(); }
    [[nodiscard]] bool contains(Timestamp t) const noexcept {
        return lo <= t && (!hi || t < *hi);
    }
    // A read at read_st observes commits < read_st; it is answerable when the
    // store holds every commit in [lo, read_st).
    [[nodiscard]] bool covers_read(Timestamp read_st) const noexcept {
        return lo <= read_st && (!hi || read_st <= *hi);
    }
    // Does [lo, hi) intersect [0, read_st)?
    [[nodiscard]] bool visible_below(Timestamp read_st) const noexcept {
        return lo < read_st && (!hi || lo < *hi);
    }

    friend bool operator==(const Window&, const Window&) = default;
};

std::ostream& operator<<(std::ostream& os, const Window& w);

struct TransactionDescriptor {
    std::string txn_id;
    Timestamp st;                      // snapshot
    std::optional<Timestamp> ct;       // leased at commit
    std::optional<Timestamp> read_st;  // older read snapshot, if any
    std::map<Key, Effect> read_buffer;
    std::set<Key> init_set;
    std::map<Key, Effect> effect_buffer;

    [[nodiscard]] Timestamp read_snapshot() const { return read_st.value_or(st); }
};

// The uniform backing-store contract. Every basic and composed store answers
// Lookup identically for the part of history its window covers.
class Store {
public:
    virtual ~Store() = default;

    virtual void doBegin(const TransactionDescriptor& txn) = 0;

    // Consolidated effect of all commits with ct < read_st, or nullopt when none.
    // Uncommitted writes, including txn's own, are never visible here.
    [[nodiscard]] virtual std::optional<Effect> lookup(const TransactionDescriptor& txn,
                                                       const Key& key,
                                                       Timestamp read_st) const = 0;

    virtual void doUpdate(const TransactionDescriptor& txn, const Key& key, const Effect& eff) = 0;
    virtual void doAbort(const TransactionDescriptor& txn) = 0;
    // Makes txn.effect_buffer visible at *txn.ct atomically.
    virtual void doCommit(const TransactionDescriptor& txn) = 0;

    virtual void persist(const std::filesystem::path& path) const = 0;

    [[nodiscard]] virtual Window window() const = 0;
    [[nodiscard]] virtual std::vector<Key> writtenKeys() const = 0;
    [[nodiscard]] virtual std::string_view kind() const = 0;

    // Oldest read timestamp still answerable. Stores that never drop history
    // return 0.
    [[nodiscard]] virtual Timestamp readHorizon() const { return Timestamp{0}; }

    // Called by the transaction manager before taking a snapshot for a new
    // transaction. Engines may use it to apply admission backpressure.
    virtual void admit() {}
};

using StoreHandle = std::shared_ptr<Store>;

// Shorthand for lookups that are not on behalf of a live transaction
// (checkpointing, verification).
[[nodiscard]] const TransactionDescriptor& detached_reader();

void validate_key_bytes(std::string_view bytes);

}  // namespace cobble

template <>
struct std::hash<cobble::Key> {
    std::size_t operator()(const cobble::Key& k) const noexcept {
        return std::hash<std::string>{}(k.str());
    }
};
