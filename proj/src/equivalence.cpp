#include "cobble/equivalence.hpp"

#include <sstream>

#include "cobble/journal_store.hpp"
#include "cobble/map_store.hpp"
#include "cobble/persistent_journal.hpp"
#include "cobble/wal_memtable_pair.hpp"

namespace cobble {

namespace {

constexpr std::size_t kMaxFailures = 8;

std::string show(const std::optional<Effect>& e) {
    if (!e) return "absent";
    std::ostringstream os;
    os << *e;
    return os.str();
}

}  // namespace

void EquivalenceReport::merge(const EquivalenceReport& other) {
    checks += other.checks;
    mismatches += other.mismatches;
    for (const auto& f : other.failures) {
        if (failures.size() < kMaxFailures) failures.push_back(f);
    }
}

EquivalenceReport check_against_oracle(const Store& store, const oracle::Trace& trace, Timestamp from,
                                       const std::string& label, std::optional<Timestamp> to,
                                       const std::vector<Key>* keys) {
    EquivalenceReport rep;
    const auto end = to.value_or(trace.end());
    const auto own = keys ? std::vector<Key>{} : trace.keys();
    for (const auto& key : keys ? *keys : own) {
        for (std::uint64_t t = from.value; t <= end.value; ++t) {
            const Timestamp rs{t};
            const auto want = oracle::valuation(trace, key, rs);
            std::optional<Effect> got;
            std::string err;
            try {
                got = store.lookup(detached_reader(), key, rs);
            } catch (const Error& e) {
                err = e.what();
            }
            ++rep.checks;
            if (err.empty() && got == want) continue;
            ++rep.mismatches;
            if (rep.failures.size() < kMaxFailures) {
                rep.failures.push_back(label + ": key " + key.str() + " at " + std::to_string(t) + " expected " +
                                       show(want) + " got " + (err.empty() ? show(got) : "error " + err));
            }
        }
    }
    return rep;
}

EngineConfig small_engine_config() {
    EngineConfig cfg;
    cfg.max_levels = 3;
    cfg.live_capacity = 2;
    cfg.wmp_rotate_effects = 24;
    cfg.level_capacity = {2, 3};
    return cfg;
}

EquivalenceReport verify_seed(std::uint64_t seed, const oracle::TraceParams& params,
                              const std::filesystem::path& scratch) {
    const auto trace = oracle::generate_trace(seed, params);
    oracle::validate(trace);
    std::filesystem::remove_all(scratch);
    std::filesystem::create_directories(scratch);
    const std::string tag = "seed " + std::to_string(seed) + " ";
    EquivalenceReport rep;

    {
        MapStore s;
        oracle::replay_against(s, trace);
        rep.merge(check_against_oracle(s, trace, Timestamp{0}, tag + "map"));
    }
    {
        JournalStore s;
        oracle::replay_against(s, trace);
        rep.merge(check_against_oracle(s, trace, Timestamp{0}, tag + "journal"));
    }
    {
        const auto path = scratch / "pjournal.log";
        {
            auto s = PersistentJournal::create(path);
            oracle::replay_against(*s, trace);
            rep.merge(check_against_oracle(*s, trace, Timestamp{0}, tag + "pjournal"));
        }
        auto again = PersistentJournal::recover(path);
        rep.merge(check_against_oracle(*again, trace, Timestamp{0}, tag + "pjournal recovered"));
    }
    {
        auto s = WalMemtablePair::create(scratch / "wmp.log", Window{Timestamp{0}, std::nullopt});
        oracle::replay_against(*s, trace);
        rep.merge(check_against_oracle(*s, trace, Timestamp{0}, tag + "wmp"));
        auto w = WalMemtablePair::create(scratch / "wmp-wal-reads.log", Window{Timestamp{0}, std::nullopt},
                                         nullptr, /*reads_from_wal=*/true);
        oracle::replay_against(*w, trace);
        rep.merge(check_against_oracle(*w, trace, Timestamp{0}, tag + "wmp via wal"));
    }
    {
        const auto dir = scratch / "cobble";
        {
            auto e = CobbleEngine::open(dir, small_engine_config());
            oracle::replay_against(*e, trace);
            rep.merge(check_against_oracle(*e, trace, e->readHorizon(), tag + "cobble"));
            e->compact_full();
            rep.merge(check_against_oracle(*e, trace, e->readHorizon(), tag + "cobble compacted"));
        }
        auto e = CobbleEngine::open(dir, small_engine_config());
        rep.merge(check_against_oracle(*e, trace, e->readHorizon(), tag + "cobble reopened"));
    }
    std::filesystem::remove_all(scratch);
    return rep;
}

}  // namespace cobble
