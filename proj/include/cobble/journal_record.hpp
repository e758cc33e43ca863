#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "cobble/effect.hpp"
#include "cobble/store.hpp"

namespace cobble {

enum class RecordKind : std::uint8_t {
    Begin = 0,
    Update = 1,
    Commit = 2,
    Abort = 3,
    Manifest = 4,
};

enum class ManifestAction : std::uint8_t { Add = 0, Remove = 1 };

inline constexpr int kLiveLevel = -1;

struct KeyRange {
    std::string lo;
    std::string hi;

    [[nodiscard]] bool contains(const Key& k) const { return lo <= k.str() && k.str() <= hi; }
    friend bool operator==(const KeyRange&, const KeyRange&) = default;
};

struct ManifestEntry {
    ManifestAction action = ManifestAction::Add;
    int level = kLiveLevel;
    std::string path;  // relative to the engine directory
    Window window;
    std::optional<KeyRange> key_range;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// One journal event. ts is st for Begin, ct for Commit, and 0 otherwise.
struct JournalRecord {
    RecordKind kind = RecordKind::Begin;
    std::string txn_id;
    Timestamp ts;
    std::optional<Key> key;          // Update only
    std::optional<Effect> effect;    // Update only
    std::optional<ManifestEntry> manifest;  // Manifest only

    static JournalRecord begin(std::string id, Timestamp st) {
        return {RecordKind::Begin, std::move(id), st, {}, {}, {}};
    }
    static JournalRecord update(std::string id, Key k, Effect e) {
        return {RecordKind::Update, std::move(id), Timestamp{0}, std::move(k), e, {}};
    }
    static JournalRecord commit(std::string id, Timestamp ct) {
        return {RecordKind::Commit, std::move(id), ct, {}, {}, {}};
    }
    static JournalRecord abort(std::string id) {
        return {RecordKind::Abort, std::move(id), Timestamp{0}, {}, {}, {}};
    }
    static JournalRecord manifest_entry(std::string id, ManifestEntry m) {
        return {RecordKind::Manifest, std::move(id), Timestamp{0}, {}, {}, std::move(m)};
    }

    friend bool operator==(const JournalRecord&, const JournalRecord&) = default;
};

}  // namespace cobble
