#include "cobble/oracle.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "cobble/fault.hpp"
#include "cobble/timestamp.hpp"

namespace cobble::oracle {

Trace Trace::from_steps(std::vector<Step> steps) {
    Trace t;
    std::unordered_map<std::string, std::size_t> index;
    std::set<std::string> done;
    for (const auto& s : steps) {
        if (s.kind == Step::Kind::Begin) {
            if (index.contains(s.txn_id)) throw std::invalid_argument("trace: duplicate begin " + s.txn_id);
            index.emplace(s.txn_id, t.txns.size());
            t.txns.push_back(TraceTxn{s.txn_id, s.ts, std::nullopt, {}});
            continue;
        }
        auto it = index.find(s.txn_id);
        if (it == index.end() || done.contains(s.txn_id)) {
            throw std::invalid_argument("trace: step for inactive transaction " + s.txn_id);
        }
        auto& txn = t.txns[it->second];
        switch (s.kind) {
            case Step::Kind::Update:
                if (!s.key) throw std::invalid_argument("trace: update without key");
                txn.writes.emplace_back(*s.key, s.effect);
                break;
            case Step::Kind::Commit:
                txn.ct = s.ts;
                done.insert(s.txn_id);
                break;
            case Step::Kind::Abort:
                done.insert(s.txn_id);
                break;
            case Step::Kind::Begin:
                break;
        }
    }
    t.steps = std::move(steps);
    return t;
}

Trace Trace::prefix(std::size_t n) const {
    n = std::min(n, steps.size());
    return from_steps(std::vector<Step>(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(n)));
}

std::vector<Key> Trace::keys() const {
    std::set<Key> out;
    for (const auto& t : txns) {
        for (const auto& [k, e] : t.writes) out.insert(k);
    }
    return {out.begin(), out.end()};
}

Timestamp Trace::end() const {
    std::uint64_t m = 0;
    for (const auto& t : txns) {
        m = std::max(m, t.st.value + 1);
        if (t.ct) m = std::max(m, t.ct->value + 1);
    }
    return Timestamp{m};
}

namespace {

struct Visible {
    Timestamp ct;
    Timestamp st;
    Effect effect;
};

// Last assignment by ct wins; every pure increment is added on top.
Effect fold_group(const std::vector<Visible>& group) {
    const Visible* winner = nullptr;
    std::int64_t incs = 0;
    for (const auto& v : group) {
        if (v.effect.base) {
            if (!winner || winner->ct < v.ct) winner = &v;
        } else {
            incs = wrapping_add(incs, v.effect.delta);
        }
    }
    if (!winner) return Effect{std::nullopt, incs};
    return Effect{winner->effect.base, wrapping_add(winner->effect.delta, incs)};
}

}  // namespace

std::optional<Effect> valuation(const Trace& trace, const Key& key, Timestamp read_st) {
    std::vector<Visible> vis;
    for (const auto& t : trace.txns) {
        if (!t.ct || !(*t.ct < read_st)) continue;
        std::optional<Effect> mine;
        for (const auto& [k, e] : t.writes) {
            if (k == key) mine = mine ? apply(*mine, e) : e;
        }
        if (mine) vis.push_back(Visible{*t.ct, t.st, *mine});
    }
    if (vis.empty()) return std::nullopt;
    std::sort(vis.begin(), vis.end(), [](const Visible& a, const Visible& b) { return a.ct < b.ct; });

    // A transaction that saw everything consumed so far starts a new
    // sequential group; otherwise it is concurrent with the current group.
    Effect acc = Effect::identity();
    std::vector<Visible> group;
    Timestamp max_ct{0};
    for (const auto& v : vis) {
        if (!group.empty() && v.st > max_ct) {
            acc = apply(acc, fold_group(group));
            group.clear();
        }
        group.push_back(v);
        max_ct = std::max(max_ct, v.ct);
    }
    return apply(acc, fold_group(group));
}

void validate(const Trace& trace) {
    std::set<std::uint64_t> cts;
    for (const auto& t : trace.txns) {
        if (!t.ct) continue;
        if (*t.ct < t.st) throw std::invalid_argument("trace: ct below st for " + t.id);
        if (!cts.insert(t.ct->value).second) throw std::invalid_argument("trace: duplicate ct");
    }
    std::optional<Timestamp> max_st;
    for (const auto& s : trace.steps) {
        if (s.kind == Step::Kind::Begin) {
            if (!max_st || *max_st < s.ts) max_st = s.ts;
        } else if (s.kind == Step::Kind::Commit && max_st && s.ts < *max_st) {
            throw std::invalid_argument("trace: commit " + s.txn_id + " lands below an issued snapshot");
        }
    }
}

Trace generate_trace(std::uint64_t seed, const TraceParams& p) {
    if (p.keys == 0 || p.txn_count == 0 || p.max_concurrency == 0 || p.max_writes == 0) {
        throw std::invalid_argument("trace parameters must be positive");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> key_dist(0, p.keys - 1);
    std::uniform_int_distribution<std::size_t> writes_dist(0, p.max_writes);
    std::uniform_int_distribution<std::int64_t> amount(-10, 50);

    struct Live {
        std::string id;
        std::size_t planned;
        std::size_t issued = 0;
    };

    TimestampGenerator gen;
    std::vector<Step> steps;
    std::vector<Live> live;
    std::size_t started = 0;
    while (started < p.txn_count || !live.empty()) {
        const bool can_begin = started < p.txn_count && live.size() < p.max_concurrency;
        if (can_begin && (live.empty() || coin(rng) < 0.4)) {
            Live l{"t" + std::to_string(started++), writes_dist(rng)};
            steps.push_back(Step{Step::Kind::Begin, l.id, gen.peekSnapshot(), std::nullopt, {}});
            live.push_back(std::move(l));
            continue;
        }
        const std::size_t i = std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng);
        auto& l = live[i];
        if (l.issued < l.planned) {
            char name[16];
            std::snprintf(name, sizeof name, "k%02zu", key_dist(rng));
            const Effect e = coin(rng) < p.incr_ratio ? Effect::incr(amount(rng)) : Effect::assign(amount(rng));
            steps.push_back(Step{Step::Kind::Update, l.id, Timestamp{0}, Key(name), e});
            ++l.issued;
            continue;
        }
        if (coin(rng) < p.abort_ratio) {
            steps.push_back(Step{Step::Kind::Abort, l.id, Timestamp{0}, std::nullopt, {}});
        } else {
            const Timestamp ct = gen.next();
            gen.endCommitNotify(ct);
            steps.push_back(Step{Step::Kind::Commit, l.id, ct, std::nullopt, {}});
        }
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
    }
    return Trace::from_steps(std::move(steps));
}

void replay_against(Store& store, const Trace& trace, FaultInjector* faults, std::size_t* completed) {
    std::unordered_map<std::string, TransactionDescriptor> open;
    std::size_t n = 0;
    if (completed) *completed = 0;
    for (const auto& s : trace.steps) {
        switch (s.kind) {
            case Step::Kind::Begin: {
                TransactionDescriptor d;
                d.txn_id = s.txn_id;
                d.st = s.ts;
                store.doBegin(d);
                open.emplace(s.txn_id, std::move(d));
                break;
            }
            case Step::Kind::Update: {
                auto& d = open.at(s.txn_id);
                auto [it, fresh] = d.effect_buffer.try_emplace(*s.key, s.effect);
                if (!fresh) it->second = apply(it->second, s.effect);
                store.doUpdate(d, *s.key, s.effect);
                break;
            }
            case Step::Kind::Commit: {
                auto& d = open.at(s.txn_id);
                d.ct = s.ts;
                store.doCommit(d);
                COBBLE_FAULT(faults, FaultPoint::AfterFlushBeforeNotify, {});
                open.erase(s.txn_id);
                break;
            }
            case Step::Kind::Abort:
                store.doAbort(open.at(s.txn_id));
                open.erase(s.txn_id);
                break;
        }
        if (completed) *completed = ++n;
    }
}

std::string to_text(const Trace& trace) {
    std::ostringstream os;
    for (const auto& s : trace.steps) {
        switch (s.kind) {
            case Step::Kind::Begin:
                os << "BEGIN " << s.txn_id << " " << s.ts.value << "\n";
                break;
            case Step::Kind::Update:
                os << "UPD " << s.txn_id << " " << s.key->str() << " "
                   << (s.effect.base ? "ASSIGN " : "INCR ") << (s.effect.base ? *s.effect.base : s.effect.delta)
                   << "\n";
                break;
            case Step::Kind::Commit:
                os << "COMMIT " << s.txn_id << " " << s.ts.value << "\n";
                break;
            case Step::Kind::Abort:
                os << "ABORT " << s.txn_id << "\n";
                break;
        }
    }
    return os.str();
}

Trace from_text(std::string_view text) {
    std::vector<Step> steps;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string verb, id;
        ls >> verb >> id;
        Step s;
        s.txn_id = id;
        bool ok = !id.empty();
        if (verb == "BEGIN" || verb == "COMMIT") {
            std::uint64_t ts = 0;
            ok = ok && static_cast<bool>(ls >> ts);
            s.kind = verb == "BEGIN" ? Step::Kind::Begin : Step::Kind::Commit;
            s.ts = Timestamp{ts};
        } else if (verb == "UPD") {
            std::string key, kind;
            std::int64_t amount = 0;
            ok = ok && static_cast<bool>(ls >> key >> kind >> amount) && (kind == "ASSIGN" || kind == "INCR");
            if (ok) {
                s.kind = Step::Kind::Update;
                s.key = Key(key);
                s.effect = kind == "ASSIGN" ? Effect::assign(amount) : Effect::incr(amount);
            }
        } else if (verb == "ABORT") {
            s.kind = Step::Kind::Abort;
        } else {
            ok = false;
        }
        std::string extra;
        if (!ok || (ls >> extra)) {
            throw std::invalid_argument("trace: bad line " + std::to_string(lineno) + ": " + line);
        }
        steps.push_back(std::move(s));
    }
    return Trace::from_steps(std::move(steps));
}

}  // namespace cobble::oracle
