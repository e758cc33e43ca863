#include "cobble/checkpoint.hpp"

#include "cobble/codec.hpp"
#include "cobble/file_util.hpp"

namespace cobble {

Checkpoint::Checkpoint(std::map<Key, Effect> entries, Window window)
    : entries_(std::move(entries)), window_(window) {
    if (!window_.hi) throw TxnStateError("checkpoint: window must be closed");
}

std::shared_ptr<Checkpoint> Checkpoint::build(const Store& src) {
    const Window w = src.window();
    if (!w.hi) throw TxnStateError("checkpoint: source store is not sealed");
    std::map<Key, Effect> entries;
    for (const auto& key : src.writtenKeys()) {
        if (auto e = src.lookup(detached_reader(), key, *w.hi)) entries.emplace(key, *e);
    }
    return std::make_shared<Checkpoint>(std::move(entries), w);
}

std::shared_ptr<Checkpoint> Checkpoint::load(const std::filesystem::path& path,
                                             std::optional<Window> expected) {
    if (!std::filesystem::exists(path)) throw IoError("checkpoint: no such file " + path.string());
    const auto decoded = codec::decode_map_file(read_file(path));
    std::map<Key, Effect> entries;
    std::optional<Window> w = expected;
    for (const auto& e : decoded) {
        if (e.versions.size() != 1) throw IntegrityError("checkpoint: expected one version per key");
        if (w && !(*w == e.window)) throw IntegrityError("checkpoint: inconsistent windows");
        w = e.window;
        entries.emplace(Key(e.key), e.versions.front().effect);
    }
    return std::make_shared<Checkpoint>(std::move(entries), w.value_or(Window{Timestamp{0}, Timestamp{0}}));
}

void Checkpoint::write(const std::filesystem::path& path, FaultInjector* faults) const {
    std::vector<codec::MapFileEntry> out;
    out.reserve(entries_.size());
    const Timestamp at = Timestamp{window_.hi->value == 0 ? 0 : window_.hi->value - 1};
    for (const auto& [key, eff] : entries_) {
        out.push_back(codec::MapFileEntry{key.str(), window_, {{at, window_.lo, eff}}});
    }
    write_file_durably(path, codec::encode_map_file(std::move(out)), faults);
}

void Checkpoint::doBegin(const TransactionDescriptor&) {
    throw TxnStateError("checkpoint: read-only store");
}

std::optional<Effect> Checkpoint::lookup(const TransactionDescriptor&, const Key& key,
                                         Timestamp read_st) const {
    if (read_st <= window_.lo) return std::nullopt;
    if (read_st < *window_.hi) throw WindowViolation("checkpoint: read inside a folded window");
    return find(key);
}

void Checkpoint::doUpdate(const TransactionDescriptor&, const Key&, const Effect&) {
    throw TxnStateError("checkpoint: read-only store");
}

void Checkpoint::doAbort(const TransactionDescriptor&) {
    throw TxnStateError("checkpoint: read-only store");
}

void Checkpoint::doCommit(const TransactionDescriptor&) {
    throw TxnStateError("checkpoint: read-only store");
}

std::vector<Key> Checkpoint::writtenKeys() const {
    std::vector<Key> out;
    out.reserve(entries_.size());
    for (const auto& [k, e] : entries_) out.push_back(k);
    return out;
}

std::optional<Effect> Checkpoint::find(const Key& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::optional<KeyRange> Checkpoint::key_range() const {
    if (entries_.empty()) return std::nullopt;
    return KeyRange{entries_.begin()->first.str(), entries_.rbegin()->first.str()};
}

}  // namespace cobble
