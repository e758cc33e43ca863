#include "cobble/transaction.hpp"

#include <cstdio>
#include <random>
#include <thread>

#include "cobble/fault.hpp"

namespace cobble {

std::string_view to_string(Isolation iso) { return iso == Isolation::SI ? "si" : "tcc"; }

Isolation parse_isolation(std::string_view name) {
    if (name == "tcc") return Isolation::TCC;
    if (name == "si") return Isolation::SI;
    throw std::invalid_argument("unknown isolation level: " + std::string(name));
}

TransactionManager::TransactionManager(StoreHandle store, ManagerOptions opts)
    : store_(std::move(store)), opts_(opts) {
    if (!store_) throw std::invalid_argument("transaction manager needs a store");
    if (opts_.recovered_floor) gen_.recoverFloor(*opts_.recovered_floor);
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(std::random_device{}()));
    session_ = buf;
}

std::shared_ptr<TransactionManager::Coordinator> TransactionManager::get(const std::string& id) const {
    std::lock_guard lock(txns_mu_);
    auto it = txns_.find(id);
    if (it == txns_.end()) throw TxnStateError("transaction " + id + " is unknown or terminated");
    return it->second;
}

void TransactionManager::forget(const std::string& id) {
    std::lock_guard lock(txns_mu_);
    txns_.erase(id);
}

std::string TransactionManager::begin(std::optional<Timestamp> read_st) {
    auto c = std::make_shared<Coordinator>();
    c->d.txn_id = session_ + "-" + std::to_string(counter_.fetch_add(1) + 1);
    constexpr int kMaxRetries = 1'000'000;
    for (int attempt = 0;; ++attempt) {
        store_->admit();
        c->d.st = gen_.peekSnapshot();
        c->d.read_st.reset();
        if (read_st) {
            const Timestamp r = std::min(std::max(*read_st, store_->readHorizon()), c->d.st);
            if (r < c->d.st) c->d.read_st = r;
        }
        try {
            store_->doBegin(c->d);
            break;
        } catch (const WindowViolation&) {
            // The engine rotated or compacted under us; take a fresh snapshot.
            if (attempt == kMaxRetries) throw;
            std::this_thread::yield();
        }
    }
    std::lock_guard lock(txns_mu_);
    txns_.emplace(c->d.txn_id, c);
    return c->d.txn_id;
}

Value TransactionManager::read(const std::string& id, const Key& key) {
    auto c = get(id);
    std::lock_guard lock(c->mu);
    auto& d = c->d;
    if (!d.init_set.contains(key)) {
        d.read_buffer[key] = store_->lookup(d, key, d.read_snapshot()).value_or(Effect::identity());
        d.init_set.insert(key);
    }
    Effect view = d.read_buffer.at(key);
    if (auto it = d.effect_buffer.find(key); it != d.effect_buffer.end()) view = apply(view, it->second);
    return evaluate(view, 0);
}

void TransactionManager::update(const std::string& id, const Key& key, const Effect& eff) {
    auto c = get(id);
    std::lock_guard lock(c->mu);
    auto [it, fresh] = c->d.effect_buffer.try_emplace(key, eff);
    if (!fresh) it->second = apply(it->second, eff);
    store_->doUpdate(c->d, key, eff);
}

CommitResult TransactionManager::commit(const std::string& id) {
    auto c = get(id);
    std::lock_guard lock(c->mu);
    auto& d = c->d;

    Timestamp ct;
    if (opts_.isolation == Isolation::SI) {
        std::unique_lock si(si_mu_);
        // First committer wins: a write by anyone at or after our snapshot.
        for (const auto& [key, eff] : d.effect_buffer) {
            auto it = committed_writes_.find(key);
            if (it != committed_writes_.end() && it->second >= d.read_snapshot()) {
                si.unlock();
                store_->doAbort(d);
                forget(id);
                return CommitResult::aborted_conflict();
            }
        }
        ct = gen_.next();
        for (const auto& [key, eff] : d.effect_buffer) committed_writes_[key] = ct;
    } else {
        ct = gen_.next();
    }

    d.ct = ct;
    try {
        store_->doCommit(d);
    } catch (const Error&) {
        gen_.endCommitNotify(ct);
        forget(id);
        throw;
    }
    COBBLE_FAULT(opts_.faults, FaultPoint::AfterFlushBeforeNotify, {});
    gen_.endCommitNotify(ct);
    forget(id);
    return CommitResult::committed(ct);
}

void TransactionManager::abort(const std::string& id) {
    auto c = get(id);
    std::lock_guard lock(c->mu);
    try {
        store_->doAbort(c->d);
    } catch (...) {
        forget(id);
        throw;
    }
    forget(id);
}

TransactionDescriptor TransactionManager::descriptor(const std::string& id) const {
    auto c = get(id);
    std::lock_guard lock(c->mu);
    return c->d;
}

std::size_t TransactionManager::active() const {
    std::lock_guard lock(txns_mu_);
    return txns_.size();
}

TransactionCoordinator::~TransactionCoordinator() {
    if (phase_ != Phase::Active) return;
    try {
        tm_.abort(id_);
    } catch (const Error&) {
    }
}

void TransactionCoordinator::require_active() const {
    if (phase_ != Phase::Active) throw TxnStateError("coordinator has no active transaction");
}

void TransactionCoordinator::begin(std::optional<Timestamp> read_st) {
    if (phase_ == Phase::Active) throw TxnStateError("coordinator already has an active transaction");
    id_ = tm_.begin(read_st);
    phase_ = Phase::Active;
}

Value TransactionCoordinator::read(const Key& key) {
    require_active();
    return tm_.read(id_, key);
}

void TransactionCoordinator::update(const Key& key, const Effect& eff) {
    require_active();
    tm_.update(id_, key, eff);
}

CommitResult TransactionCoordinator::commit() {
    require_active();
    try {
        auto r = tm_.commit(id_);
        phase_ = r.ok() ? Phase::Committed : Phase::Aborted;
        return r;
    } catch (const Error&) {
        phase_ = Phase::Aborted;
        throw;
    }
}

void TransactionCoordinator::abort() {
    require_active();
    phase_ = Phase::Aborted;
    tm_.abort(id_);
}

}  // namespace cobble
