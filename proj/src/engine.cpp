#include "cobble/engine.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

#include "cobble/fault.hpp"
#include "cobble/file_util.hpp"

namespace cobble {

namespace {

std::string wal_name(Timestamp lo) { return "wal-" + std::to_string(lo.value) + ".log"; }

std::string l0_name(Window w) {
    return "ckpt-0-" + std::to_string(w.lo.value) + "-" + std::to_string(w.hi->value) + ".cb";
}

// ckpt-<level>-<lo>-<hi>-<shard>.cb -> shard
std::optional<std::uint64_t> shard_of(const std::string& path) {
    if (!path.starts_with("ckpt-") || !path.ends_with(".cb")) return std::nullopt;
    const auto body = path.substr(5, path.size() - 8);
    if (std::count(body.begin(), body.end(), '-') != 3) return std::nullopt;
    try {
        return std::stoull(body.substr(body.rfind('-') + 1));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

bool is_store_file(const std::string& name) {
    return (name.starts_with("wal-") && name.ends_with(".log")) ||
           (name.starts_with("ckpt-") && name.ends_with(".cb"));
}

}  // namespace

std::size_t EngineConfig::capacity(int level) const {
    if (level >= 0 && static_cast<std::size_t>(level) < level_capacity.size() &&
        level_capacity[level] > 0) {
        return level_capacity[level];
    }
    std::size_t cap = 4;
    for (int i = 0; i < level; ++i) cap *= 10;
    return cap;
}

void EngineConfig::validate() const {
    if (max_levels < 2) throw std::invalid_argument("engine: max_levels must be at least 2");
    if (live_capacity < 1) throw std::invalid_argument("engine: live_capacity must be at least 1");
    if (wmp_rotate_effects < 1) throw std::invalid_argument("engine: wmp_rotate_effects must be at least 1");
}

CobbleEngine::CobbleEngine(std::filesystem::path dir, EngineConfig cfg, FaultInjector* faults)
    : dir_(std::move(dir)), cfg_(std::move(cfg)), faults_(faults) {}

CobbleEngine::~CobbleEngine() = default;

std::shared_ptr<CobbleEngine> CobbleEngine::open(const std::filesystem::path& dir, EngineConfig cfg,
                                                 FaultInjector* faults) {
    cfg.validate();
    std::filesystem::create_directories(dir);
    std::shared_ptr<CobbleEngine> e(new CobbleEngine(dir, std::move(cfg), faults));
    if (std::filesystem::exists(dir / Manifest::kFileName)) {
        e->recover();
    } else {
        e->init_fresh();
    }
    return e;
}

void CobbleEngine::init_fresh() {
    manifest_ = Manifest::create(dir_, faults_);
    const Window w{Timestamp{0}, std::nullopt};
    const auto path = wal_name(w.lo);
    auto wmp = WalMemtablePair::create(dir_ / path, w, faults_);
    manifest_->commit({ManifestEntry{ManifestAction::Add, kLiveLevel, path, w, std::nullopt}}, Timestamp{0});

    auto layout = std::make_shared<Layout>();
    layout->live.push_back({path, wmp});
    layout->levels.resize(cfg_.max_levels);
    layout_ = std::move(layout);
}

void CobbleEngine::recover() {
    manifest_ = Manifest::open(dir_, faults_);
    COBBLE_FAULT(faults_, FaultPoint::DuringRecoveryStep, dir_ / Manifest::kFileName, 0);

    auto layout = std::make_shared<Layout>();
    layout->levels.resize(cfg_.max_levels);
    Timestamp floor = manifest_->max_timestamp();
    const auto bump = [&floor](std::optional<Timestamp> hi) {
        if (hi && hi->value > 0) floor = std::max(floor, Timestamp{hi->value - 1});
    };

    std::vector<ManifestEntry> live_entries;
    for (const auto& e : manifest_->live()) {
        if (e.level == kLiveLevel) {
            live_entries.push_back(e);
            continue;
        }
        if (e.level < 0 || e.level >= cfg_.max_levels) {
            throw IntegrityError("engine: manifest references level " + std::to_string(e.level));
        }
        auto ck = Checkpoint::load(dir_ / e.path, e.window);
        layout->levels[e.level].push_back({e.path, ck, e.key_range});
        bump(e.window.hi);
        if (auto s = shard_of(e.path)) shard_seq_ = std::max(shard_seq_, *s + 1);
    }
    std::sort(layout->levels[0].begin(), layout->levels[0].end(),
              [](const CheckpointRef& a, const CheckpointRef& b) {
                  return a.store->window().lo < b.store->window().lo;
              });
    std::sort(live_entries.begin(), live_entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.window.lo < b.window.lo; });

    std::vector<std::shared_ptr<WalMemtablePair>> wmps;
    for (const auto& e : live_entries) {
        auto w = WalMemtablePair::recover(dir_ / e.path, Window{e.window.lo, std::nullopt}, faults_);
        if (auto t = w->wal()->memory().maxTimestamp()) floor = std::max(floor, *t);
        bump(e.window.hi);
        wmps.push_back(std::move(w));
    }
    COBBLE_FAULT(faults_, FaultPoint::DuringRecoveryStep, dir_, 1);

    const Timestamp next_lo{floor.value + 1};
    const bool already_fresh = live_entries.size() == 1 && !live_entries[0].window.hi &&
                               live_entries[0].window.lo == next_lo;
    if (already_fresh) {
        layout->live.push_back({live_entries[0].path, wmps[0]});
    } else {
        // Fold every recovered live pair into L0, then start one empty pair.
        std::vector<ManifestEntry> entries;
        std::vector<CheckpointRef> made;
        for (std::size_t i = 0; i < live_entries.size(); ++i) {
            const auto& e = live_entries[i];
            const Timestamp hi = e.window.hi ? *e.window.hi
                                 : i + 1 < live_entries.size() ? live_entries[i + 1].window.lo
                                                               : next_lo;
            entries.push_back(ManifestEntry{ManifestAction::Remove, kLiveLevel, e.path, e.window, std::nullopt});
            if (!(e.window.lo < hi)) continue;
            wmps[i]->seal(hi);
            auto ck = Checkpoint::build(*wmps[i]);
            const auto path = l0_name(ck->window());
            ck->write(dir_ / path, faults_);
            entries.push_back(ManifestEntry{ManifestAction::Add, 0, path, ck->window(), ck->key_range()});
            made.push_back({path, ck, ck->key_range()});
        }
        COBBLE_FAULT(faults_, FaultPoint::DuringRecoveryStep, dir_, 2);

        const auto path = wal_name(next_lo);
        const Window w{next_lo, std::nullopt};
        auto fresh = WalMemtablePair::create(dir_ / path, w, faults_);
        entries.push_back(ManifestEntry{ManifestAction::Add, kLiveLevel, path, w, std::nullopt});
        COBBLE_FAULT(faults_, FaultPoint::DuringRecoveryStep, dir_ / path, 3);

        manifest_->commit(entries, floor);
        COBBLE_FAULT(faults_, FaultPoint::DuringRecoveryStep, dir_ / Manifest::kFileName, 4);

        layout->live.push_back({path, fresh});
        for (auto& m : made) layout->levels[0].push_back(std::move(m));
    }

    for (const auto& level : layout->levels) {
        for (const auto& c : level) layout->horizon = std::max(layout->horizon, *c.store->window().hi);
    }
    remove_unreferenced(*layout);
    COBBLE_FAULT(faults_, FaultPoint::DuringRecoveryStep, dir_, 5);

    pending_horizon_ = layout->horizon;
    layout_ = std::move(layout);
    recovered_floor_ = floor;
    last_ct_ = floor;
    max_ts_ = floor;
}

void CobbleEngine::remove_unreferenced(const Layout& layout) const {
    std::set<std::string> referenced;
    for (const auto& w : layout.live) referenced.insert(w.path);
    for (const auto& level : layout.levels) {
        for (const auto& c : level) referenced.insert(c.path);
    }
    std::vector<std::string> doomed;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        const auto name = entry.path().filename().string();
        if (is_store_file(name) && !referenced.contains(name)) doomed.push_back(name);
    }
    delete_files(doomed);
}

void CobbleEngine::delete_files(const std::vector<std::string>& paths) const {
    std::error_code ec;
    for (const auto& p : paths) std::filesystem::remove(dir_ / p, ec);
    if (!paths.empty()) sync_directory(dir_);
}

// ---------------------------------------------------------------------------
// Transactions

void CobbleEngine::admit() {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, std::chrono::milliseconds(100), [this] { return !rotation_pending_; });
}

void CobbleEngine::doBegin(const TransactionDescriptor& txn) {
    std::lock_guard lock(mu_);
    const auto& newest = layout_->live.back();
    if (txn.st < newest.store->window().lo) {
        throw StaleSnapshot("cobble: snapshot predates the live pair");
    }
    if (txn.read_snapshot() < std::max(layout_->horizon, pending_horizon_)) {
        throw StaleSnapshot("cobble: read snapshot below the compaction horizon");
    }
    if (pinned_.contains(txn.txn_id)) throw TxnStateError("cobble: duplicate begin for " + txn.txn_id);
    newest.store->doBegin(txn);
    pinned_.emplace(txn.txn_id, Pin{newest.store, txn.read_snapshot()});
    max_ts_ = std::max(max_ts_, txn.st);
}

std::shared_ptr<WalMemtablePair> CobbleEngine::pinned_store(const std::string& txn_id) const {
    std::lock_guard lock(mu_);
    auto it = pinned_.find(txn_id);
    if (it == pinned_.end()) throw TxnStateError("cobble: transaction " + txn_id + " is not active");
    return it->second.wmp;
}

std::optional<Effect> CobbleEngine::lookup(const TransactionDescriptor&, const Key& key,
                                           Timestamp read_st) const {
    std::size_t probes = 0;
    return lookup_counted(key, read_st, probes);
}

std::optional<Effect> CobbleEngine::lookup_counted(const Key& key, Timestamp read_st,
                                                   std::size_t& probes) const {
    const auto layout = this->layout();
    if (read_st < layout->horizon) throw WindowViolation("cobble: read below the compaction horizon");

    probes = 0;
    std::vector<Effect> found;  // newest first
    bool done = false;
    const auto take = [&](const Store& s) {
        ++probes;
        if (auto e = s.lookup(detached_reader(), key, read_st)) {
            found.push_back(*e);
            done = e->is_assignment();
        }
    };

    for (auto it = layout->live.rbegin(); it != layout->live.rend() && !done; ++it) {
        if (it->store->committedEffects() == 0) continue;
        if (!it->store->window().visible_below(read_st)) continue;
        take(*it->store);
    }
    for (std::size_t lvl = 0; lvl < layout->levels.size() && !done; ++lvl) {
        const auto& level = layout->levels[lvl];
        for (auto it = level.rbegin(); it != level.rend() && !done; ++it) {
            if (!it->range) continue;  // empty
            if (lvl > 0 && !it->range->contains(key)) continue;
            if (!it->store->window().visible_below(read_st)) continue;
            take(*it->store);
        }
    }
    probes_.fetch_add(probes, std::memory_order_relaxed);

    if (found.empty()) return std::nullopt;
    Effect out = Effect::identity();
    for (auto it = found.rbegin(); it != found.rend(); ++it) out = apply(out, *it);
    return out;
}

void CobbleEngine::doUpdate(const TransactionDescriptor& txn, const Key& key, const Effect& eff) {
    pinned_store(txn.txn_id)->doUpdate(txn, key, eff);
}

void CobbleEngine::doAbort(const TransactionDescriptor& txn) {
    auto wmp = pinned_store(txn.txn_id);
    try {
        wmp->doAbort(txn);
    } catch (const Error&) {
        finish(txn.txn_id, std::nullopt);
        throw;
    }
    finish(txn.txn_id, std::nullopt);
}

void CobbleEngine::doCommit(const TransactionDescriptor& txn) {
    auto wmp = pinned_store(txn.txn_id);
    try {
        wmp->doCommit(txn);
    } catch (const Error&) {
        finish(txn.txn_id, std::nullopt);
        throw;
    }
    finish(txn.txn_id, txn.ct);
}

void CobbleEngine::finish(const std::string& txn_id, std::optional<Timestamp> ct) {
    bool run = false;
    {
        std::lock_guard lock(mu_);
        pinned_.erase(txn_id);
        if (ct) {
            last_ct_ = last_ct_ ? std::max(*last_ct_, *ct) : *ct;
            max_ts_ = std::max(max_ts_, *ct);
        }
        if (layout_->live.back().store->committedEffects() >= cfg_.wmp_rotate_effects) {
            rotation_pending_ = true;
        }
        run = pinned_.empty() && (rotation_pending_ || needs_compaction(*layout_));
    }
    cv_.notify_all();
    if (run) maintain();
}

std::size_t CobbleEngine::pinned() const {
    std::lock_guard lock(mu_);
    return pinned_.size();
}

// ---------------------------------------------------------------------------
// Rotation and compaction

bool CobbleEngine::needs_compaction(const Layout& layout) const {
    if (layout.live.size() > cfg_.live_capacity) return true;
    for (int k = 0; k + 1 < cfg_.max_levels; ++k) {
        if (layout.levels[k].size() > cfg_.capacity(k)) return true;
    }
    return false;
}

void CobbleEngine::maintain() {
    std::unique_lock guard(maint_mu_, std::try_to_lock);
    if (!guard.owns_lock()) return;
    rotate_locked();
    compact_locked(false);
    guard.unlock();
    cv_.notify_all();
}

bool CobbleEngine::rotate() {
    std::lock_guard guard(maint_mu_);
    {
        std::lock_guard lock(mu_);
        rotation_pending_ = true;
    }
    const bool done = rotate_locked();
    cv_.notify_all();
    return done;
}

bool CobbleEngine::rotate_locked() {
    std::lock_guard lock(mu_);
    if (!rotation_pending_ || !pinned_.empty()) return false;
    const auto newest = layout_->live.back();
    const auto last = newest.store->maxCommitted();
    if (newest.store->committedEffects() == 0 || !last) {
        rotation_pending_ = false;
        return false;
    }
    const Timestamp lo = newest.store->window().lo;
    const Timestamp hi{last->value + 1};
    const auto path = wal_name(hi);
    try {
        auto fresh = WalMemtablePair::create(dir_ / path, Window{hi, std::nullopt}, faults_);
        COBBLE_FAULT(faults_, FaultPoint::AfterWalWriteBeforeManifest, dir_ / path);
        manifest_->commit(
            {
                ManifestEntry{ManifestAction::Remove, kLiveLevel, newest.path, Window{lo, std::nullopt}, std::nullopt},
                ManifestEntry{ManifestAction::Add, kLiveLevel, newest.path, Window{lo, hi}, std::nullopt},
                ManifestEntry{ManifestAction::Add, kLiveLevel, path, Window{hi, std::nullopt}, std::nullopt},
            },
            max_ts_);
        newest.store->seal(hi);
        auto next = std::make_shared<Layout>(*layout_);
        next->live.push_back({path, std::move(fresh)});
        layout_ = std::move(next);
        rotation_pending_ = false;
        return true;
    } catch (const Error&) {
        ++maintenance_errors_;
        rotation_pending_ = false;
        std::error_code ec;
        std::filesystem::remove(dir_ / path, ec);
        return false;
    }
}

void CobbleEngine::compact() {
    std::lock_guard guard(maint_mu_);
    compact_locked(false);
}

void CobbleEngine::compact_full() {
    std::lock_guard guard(maint_mu_);
    {
        std::lock_guard lock(mu_);
        if (!pinned_.empty()) throw TxnStateError("cobble: full compaction with transactions in flight");
        rotation_pending_ = true;
    }
    rotate_locked();
    compact_locked(true);
    cv_.notify_all();
}

void CobbleEngine::compact_locked(bool full) {
    compact_live(full);
    for (int k = 0; k + 1 < cfg_.max_levels; ++k) compact_level(k, full);
}

bool CobbleEngine::compact_live(bool full) {
    std::vector<WmpRef> victims;
    Timestamp new_horizon;
    Timestamp ts;
    {
        std::lock_guard lock(mu_);
        std::optional<Timestamp> min_snap;
        for (const auto& [id, pin] : pinned_) {
            if (!min_snap || pin.read_snapshot < *min_snap) min_snap = pin.read_snapshot;
        }
        const std::size_t cap = full ? 1 : cfg_.live_capacity;
        const auto& live = layout_->live;
        std::size_t remaining = live.size();
        for (std::size_t i = 0; i + 1 < live.size() && remaining > cap; ++i) {
            const Window w = live[i].store->window();
            if (!w.hi) break;
            if (min_snap && *min_snap < *w.hi) break;  // gate: an active reader still needs it
            victims.push_back(live[i]);
            --remaining;
        }
        if (victims.empty()) return false;
        new_horizon = *victims.back().store->window().hi;
        pending_horizon_ = std::max(pending_horizon_, new_horizon);
        ts = max_ts_;
    }

    std::vector<std::string> written;
    try {
        std::vector<ManifestEntry> entries;
        std::vector<CheckpointRef> made;
        for (const auto& v : victims) {
            const Window w = v.store->window();
            auto ck = Checkpoint::build(*v.store);
            const auto path = l0_name(w);
            written.push_back(path);
            ck->write(dir_ / path, faults_);
            entries.push_back(ManifestEntry{ManifestAction::Remove, kLiveLevel, v.path, w, std::nullopt});
            entries.push_back(ManifestEntry{ManifestAction::Add, 0, path, w, ck->key_range()});
            made.push_back({path, std::move(ck), entries.back().key_range});
        }
        COBBLE_FAULT(faults_, FaultPoint::AfterWalWriteBeforeManifest, dir_ / written.back());
        manifest_->commit(entries, ts);
        {
            std::lock_guard lock(mu_);
            auto next = std::make_shared<Layout>(*layout_);
            next->live.erase(next->live.begin(), next->live.begin() + static_cast<std::ptrdiff_t>(victims.size()));
            for (auto& m : made) next->levels[0].push_back(std::move(m));
            next->horizon = std::max(next->horizon, new_horizon);
            layout_ = std::move(next);
        }
    } catch (const Error&) {
        ++maintenance_errors_;
        {
            std::lock_guard lock(mu_);
            pending_horizon_ = layout_->horizon;
        }
        delete_files(written);
        return false;
    }
    std::vector<std::string> old;
    for (const auto& v : victims) old.push_back(v.path);
    delete_files(old);
    return true;
}

std::string CobbleEngine::shard_path(int level, Window w) {
    return "ckpt-" + std::to_string(level) + "-" + std::to_string(w.lo.value) + "-" +
           std::to_string(w.hi->value) + "-" + std::to_string(shard_seq_++) + ".cb";
}

bool CobbleEngine::compact_level(int level, bool full) {
    std::shared_ptr<const Layout> layout;
    Timestamp ts;
    {
        std::lock_guard lock(mu_);
        layout = layout_;
        ts = max_ts_;
    }
    const auto& src_level = layout->levels[level];
    const std::size_t cap = full ? 0 : cfg_.capacity(level);
    if (src_level.size() <= cap) return false;
    const std::size_t n = src_level.size() - cap;
    const std::vector<CheckpointRef> sources(src_level.begin(), src_level.begin() + static_cast<std::ptrdiff_t>(n));
    const auto& targets = layout->levels[level + 1];

    Timestamp src_lo = Timestamp::max();
    Timestamp src_hi{0};
    for (const auto& s : sources) {
        src_lo = std::min(src_lo, s.store->window().lo);
        src_hi = std::max(src_hi, *s.store->window().hi);
    }

    // Targets hold older history than the sources, so target ⊙ source. A key
    // that falls inside a target's range joins that target even when it is
    // new to it; the rest are split at the gaps between target ranges, which
    // keeps key ranges at this level disjoint.
    std::vector<std::optional<std::map<Key, Effect>>> modified(targets.size());
    std::map<Key, Effect> residual;
    for (const auto& s : sources) {
        for (const auto& [key, eff] : s.store->entries()) {
            std::optional<std::size_t> t;
            for (std::size_t i = 0; i < targets.size(); ++i) {
                if (targets[i].range && targets[i].range->contains(key)) {
                    t = i;
                    break;
                }
            }
            auto& dest = t ? (modified[*t] ? *modified[*t] : modified[*t].emplace(targets[*t].store->entries()))
                           : residual;
            auto [it, fresh] = dest.try_emplace(key, eff);
            if (!fresh) it->second = apply(it->second, eff);
        }
    }

    std::vector<std::string> bounds;  // sorted upper bounds of target ranges
    for (const auto& t : targets) {
        if (t.range) bounds.push_back(t.range->hi);
    }
    std::sort(bounds.begin(), bounds.end());
    std::map<std::size_t, std::map<Key, Effect>> gaps;
    for (auto& [key, eff] : residual) {
        const auto gap = static_cast<std::size_t>(
            std::lower_bound(bounds.begin(), bounds.end(), key.str()) - bounds.begin());
        gaps[gap].emplace(key, eff);
    }

    std::vector<std::string> written;
    try {
        std::vector<ManifestEntry> entries;
        for (const auto& s : sources) {
            entries.push_back(ManifestEntry{ManifestAction::Remove, level, s.path, s.store->window(), s.range});
        }
        auto next_targets = targets;
        std::vector<std::string> replaced;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (!modified[i]) continue;
            const Window tw = targets[i].store->window();
            const Window w{std::min(tw.lo, src_lo), std::max(*tw.hi, src_hi)};
            auto ck = std::make_shared<Checkpoint>(std::move(*modified[i]), w);
            const auto path = shard_path(level + 1, w);
            written.push_back(path);
            ck->write(dir_ / path, faults_);
            entries.push_back(ManifestEntry{ManifestAction::Remove, level + 1, targets[i].path, tw, targets[i].range});
            entries.push_back(ManifestEntry{ManifestAction::Add, level + 1, path, w, targets[i].range});
            replaced.push_back(targets[i].path);
            next_targets[i] = CheckpointRef{path, std::move(ck), targets[i].range};
        }
        for (auto& [gap, keys] : gaps) {
            const Window w{src_lo, src_hi};
            auto ck = std::make_shared<Checkpoint>(std::move(keys), w);
            const auto path = shard_path(level + 1, w);
            written.push_back(path);
            ck->write(dir_ / path, faults_);
            entries.push_back(ManifestEntry{ManifestAction::Add, level + 1, path, w, ck->key_range()});
            next_targets.push_back(CheckpointRef{path, ck, ck->key_range()});
        }
        if (!written.empty()) {
            COBBLE_FAULT(faults_, FaultPoint::AfterWalWriteBeforeManifest, dir_ / written.back());
        }
        manifest_->commit(entries, ts);
        {
            std::lock_guard lock(mu_);
            auto next = std::make_shared<Layout>(*layout_);
            next->levels[level].erase(next->levels[level].begin(),
                                      next->levels[level].begin() + static_cast<std::ptrdiff_t>(n));
            next->levels[level + 1] = std::move(next_targets);
            layout_ = std::move(next);
        }
        for (const auto& s : sources) replaced.push_back(s.path);
        delete_files(replaced);
        return true;
    } catch (const Error&) {
        ++maintenance_errors_;
        delete_files(written);
        return false;
    }
}

// ---------------------------------------------------------------------------
// Introspection

std::shared_ptr<const Layout> CobbleEngine::layout() const {
    std::lock_guard lock(mu_);
    return layout_;
}

Timestamp CobbleEngine::readHorizon() const {
    std::lock_guard lock(mu_);
    return std::max(layout_->horizon, pending_horizon_);
}

std::vector<Key> CobbleEngine::writtenKeys() const {
    const auto layout = this->layout();
    std::set<Key> keys;
    for (const auto& w : layout->live) {
        for (auto& k : w.store->writtenKeys()) keys.insert(std::move(k));
    }
    for (const auto& level : layout->levels) {
        for (const auto& c : level) {
            for (const auto& [k, e] : c.store->entries()) keys.insert(k);
        }
    }
    return {keys.begin(), keys.end()};
}

void CobbleEngine::persist(const std::filesystem::path& path) const {
    Timestamp at{0};
    {
        std::lock_guard lock(mu_);
        if (last_ct_) at = Timestamp{last_ct_->value + 1};
    }
    std::map<Key, Effect> entries;
    for (const auto& key : writtenKeys()) {
        if (auto e = lookup(detached_reader(), key, at)) entries.emplace(key, *e);
    }
    Checkpoint(std::move(entries), Window{Timestamp{0}, at}).write(path);
}

std::string CobbleEngine::describe() const {
    const auto layout = this->layout();
    std::ostringstream os;
    os << "horizon " << layout->horizon << "\n";
    for (const auto& w : layout->live) {
        os << "live " << w.path << " " << w.store->window() << " effects=" << w.store->committedEffects()
           << "\n";
    }
    for (std::size_t k = 0; k < layout->levels.size(); ++k) {
        for (const auto& c : layout->levels[k]) {
            os << "L" << k << " " << c.path << " " << c.store->window() << " keys=" << c.store->entries().size();
            if (c.range) os << " range=[" << c.range->lo << ", " << c.range->hi << "]";
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace cobble
