#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "cobble/engine.hpp"
#include "cobble/equivalence.hpp"
#include "cobble/errors.hpp"
#include "cobble/journal_store.hpp"
#include "cobble/manifest.hpp"
#include "cobble/persistent_journal.hpp"
#include "testutil.hpp"

namespace cobble {
namespace {

using test::look;
using test::run_txn;

EngineConfig manual_config() {
    // maintenance only when a test asks for it
    EngineConfig cfg;
    cfg.max_levels = 3;
    cfg.live_capacity = 100;
    cfg.wmp_rotate_effects = 1'000'000;
    cfg.level_capacity = {100, 100};
    return cfg;
}

// Commits one write per transaction, sequentially, with st = ct.
class Driver {
public:
    explicit Driver(Store& s, std::uint64_t first_ts = 0) : s_(s), ts_(first_ts) {}
    std::uint64_t put(const char* key, Effect e) {
        const auto t = ts_++;
        run_txn(s_, "d" + std::to_string(t), t, t, {{key, e}});
        return t;
    }
    [[nodiscard]] std::uint64_t now() const { return ts_; }

private:
    Store& s_;
    std::uint64_t ts_;
};

TEST(Engine, FreshLayout) {
    test::ScratchDir dir("eng");
    auto e = CobbleEngine::open(dir.path(), manual_config());
    const auto l = e->layout();
    ASSERT_EQ(l->live.size(), 1u);
    EXPECT_EQ(l->live[0].path, "wal-0.log");
    EXPECT_EQ(l->live[0].store->window(), (Window{Timestamp{0}, std::nullopt}));
    EXPECT_EQ(l->levels.size(), 3u);
    EXPECT_EQ(e->readHorizon(), Timestamp{0});
    EXPECT_TRUE(std::filesystem::exists(dir / "MANIFEST"));
}

TEST(Engine, RotationBoundary) {
    test::ScratchDir dir("eng");
    auto e = CobbleEngine::open(dir.path(), manual_config());
    Driver d(*e);
    while (d.now() <= 9) d.put("k", Effect::incr(1));
    ASSERT_TRUE(e->rotate());
    const auto l = e->layout();
    ASSERT_EQ(l->live.size(), 2u);
    EXPECT_EQ(l->live[0].store->window(), (Window{Timestamp{0}, Timestamp{10}}));
    EXPECT_EQ(l->live[1].store->window(), (Window{Timestamp{10}, std::nullopt}));
    EXPECT_EQ(l->live[1].path, "wal-10.log");
    EXPECT_FALSE(e->rotate());  // nothing new to seal
}

TEST(Engine, LiveWindowsTile) {
    test::ScratchDir dir("eng");
    auto e = CobbleEngine::open(dir.path(), manual_config());
    Driver d(*e);
    for (int r = 0; r < 5; ++r) {
        for (int i = 0; i < 3; ++i) d.put("k", Effect::incr(1));
        ASSERT_TRUE(e->rotate());
    }
    const auto l = e->layout();
    for (std::size_t i = 1; i < l->live.size(); ++i) {
        ASSERT_EQ(*l->live[i - 1].store->window().hi, l->live[i].store->window().lo);
    }
    EXPECT_EQ(look(*e, "k", d.now()), Effect::incr(15));
}

TEST(Engine, BeginBelowLivePairIsStale) {
    test::ScratchDir dir("eng");
    auto e = CobbleEngine::open(dir.path(), manual_config());
    Driver d(*e);
    for (int i = 0; i < 4; ++i) d.put("k", Effect::incr(1));
    e->rotate();
    EXPECT_THROW(e->doBegin(test::descriptor("old", 2)), StaleSnapshot);
    EXPECT_NO_THROW(e->doBegin(test::descriptor("new", 4)));
}

TEST(Engine, RotationDefersUntilUnpinned) {
    test::ScratchDir dir("eng");
    auto cfg = manual_config();
    cfg.wmp_rotate_effects = 3;
    auto e = CobbleEngine::open(dir.path(), cfg);
    Driver d(*e);
    auto pinned = test::descriptor("long", 0);
    e->doBegin(pinned);
    d.put("a", Effect::incr(1));
    d.put("a", Effect::incr(1));
    d.put("a", Effect::incr(1));
    EXPECT_EQ(e->layout()->live.size(), 1u);  // rotation pending but blocked

    std::atomic<bool> admitted{false};
    std::thread waiter([&] {
        e->admit();
        admitted = true;
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    e->doAbort(pinned);  // last pin gone: rotation runs
    waiter.join();
    EXPECT_TRUE(admitted);
    const auto l = e->layout();
    ASSERT_EQ(l->live.size(), 2u);
    const auto fresh_lo = l->live[1].store->window().lo;
    EXPECT_EQ(fresh_lo, Timestamp{3});
    auto late = test::descriptor("late", d.now());
    e->doBegin(late);
    EXPECT_EQ(l->live[1].store->wal()->memory().txn("late")->st, Timestamp{d.now()});
    e->doAbort(late);
}

TEST(Engine, AdmitTimesOutWhilePinned) {
    test::ScratchDir dir("eng");
    auto cfg = manual_config();
    cfg.wmp_rotate_effects = 1;
    auto e = CobbleEngine::open(dir.path(), cfg);
    auto pinned = test::descriptor("long", 0);
    e->doBegin(pinned);
    Driver(*e, 0).put("a", Effect::incr(1));
    const auto t0 = std::chrono::steady_clock::now();
    e->admit();
    EXPECT_GE(std::chrono::steady_clock::now() - t0, std::chrono::milliseconds(90));
    e->doAbort(pinned);
}

TEST(Engine, LiveToL0KeepsLookups) {
    test::ScratchDir dir("eng");
    auto cfg = manual_config();
    cfg.live_capacity = 4;
    auto e = CobbleEngine::open(dir.path(), cfg);
    JournalStore ref;
    Driver d(*e), r(ref);
    const char* keys[] = {"a", "b", "c"};
    for (int w = 0; w < 4; ++w) {
        for (int i = 0; i < 4; ++i) {
            const auto eff = (i + w) % 3 ? Effect::incr(i + 1) : Effect::assign(w * 10);
            d.put(keys[(i + w) % 3], eff);
            r.put(keys[(i + w) % 3], eff);
        }
        e->rotate();
    }
    ASSERT_EQ(e->layout()->live.size(), 5u);
    const auto before_h = e->readHorizon();
    std::map<std::pair<std::string, std::uint64_t>, std::optional<Effect>> before;
    for (const char* k : keys) {
        for (auto t = before_h.value; t <= d.now(); ++t) before[{k, t}] = look(*e, k, t);
    }
    const auto before_now = d.now();
    // the commit that leaves nothing pinned runs the overdue compaction
    d.put("a", Effect::incr(100));
    r.put("a", Effect::incr(100));
    const auto l = e->layout();
    EXPECT_EQ(l->live.size(), 4u);
    ASSERT_EQ(l->levels[0].size(), 1u);
    EXPECT_EQ(l->levels[0][0].path, "ckpt-0-0-4.cb");
    EXPECT_EQ(e->readHorizon(), Timestamp{4});
    for (const char* k : keys) {
        for (auto t = e->readHorizon().value; t <= d.now(); ++t) {
            if (t <= before_now) {
                ASSERT_EQ(look(*e, k, t), before.at({k, t})) << k << t;
            }
            ASSERT_EQ(look(*e, k, t), look(ref, k, t)) << k << t;
        }
    }
    EXPECT_THROW((void)look(*e, "a", 2), WindowViolation);
    EXPECT_FALSE(std::filesystem::exists(dir / "wal-0.log"));
}

TEST(Engine, GateHoldsBackCompaction) {
    test::ScratchDir dir("eng");
    auto cfg = manual_config();
    cfg.live_capacity = 1;
    auto e = CobbleEngine::open(dir.path(), cfg);
    Driver d(*e);
    for (int i = 0; i < 10; ++i) d.put("k", Effect::incr(1));
    e->rotate();  // [0,10) sealed
    auto reader = test::descriptor("reader", 10);
    reader.read_st = Timestamp{5};
    e->doBegin(reader);
    e->compact();
    EXPECT_EQ(e->layout()->levels[0].size(), 0u);
    EXPECT_EQ(look(*e, "k", 5), Effect::incr(5));
    e->doAbort(reader);  // unpinned: finish() runs maintenance
    EXPECT_EQ(e->layout()->levels[0].size(), 1u);
    EXPECT_EQ(e->readHorizon(), Timestamp{10});
}

TEST(Engine, BeginBelowHorizonIsStale) {
    test::ScratchDir dir("eng");
    auto cfg = manual_config();
    cfg.live_capacity = 1;
    auto e = CobbleEngine::open(dir.path(), cfg);
    Driver d(*e);
    for (int i = 0; i < 6; ++i) d.put("k", Effect::incr(1));
    e->rotate();
    e->compact();
    ASSERT_EQ(e->readHorizon(), Timestamp{6});
    auto old = test::descriptor("old", 6);
    old.read_st = Timestamp{3};
    EXPECT_THROW(e->doBegin(old), StaleSnapshot);
}

TEST(Engine, L0ToL1DisjointKeysMakeNewShard) {
    test::ScratchDir dir("eng");
    auto cfg = manual_config();
    cfg.live_capacity = 1;
    cfg.level_capacity = {1, 100};
    auto e = CobbleEngine::open(dir.path(), cfg);
    Driver d(*e);
    d.put("a", Effect::assign(1));
    d.put("b", Effect::incr(2));
    e->rotate();
    e->compact();
    d.put("x", Effect::assign(7));
    e->rotate();
    e->compact();  // second L0 file overflows into L1
    const auto l = e->layout();
    ASSERT_EQ(l->levels[0].size(), 1u);
    ASSERT_EQ(l->levels[1].size(), 1u);
    const auto& shard = *l->levels[1][0].store;
    EXPECT_EQ(shard.find("a"), Effect::assign(1));
    EXPECT_EQ(shard.find("b"), Effect::incr(2));
    EXPECT_EQ(l->levels[1][0].range, (KeyRange{"a", "b"}));
    EXPECT_EQ(look(*e, "x", d.now()), Effect::assign(7));
}

TEST(Engine, L0ToL1OverlapFoldsOldThenNew) {
    test::ScratchDir dir("eng");
    auto cfg = manual_config();
    cfg.live_capacity = 1;
    cfg.level_capacity = {0, 100};  // everything in L0 moves down at once
    cfg.level_capacity[0] = 1;
    auto e = CobbleEngine::open(dir.path(), cfg);
    Driver d(*e);
    d.put("k", Effect::assign(2));
    d.put("j", Effect::incr(1));
    e->rotate();
    e->compact();
    d.put("k", Effect::incr(1));
    e->rotate();
    e->compact();
    d.put("k", Effect::incr(5));
    d.put("m", Effect::incr(4));
    e->rotate();
    e->compact();  // L0 overflows again: k overlaps the L1 shard's range [j, k]
    const auto l = e->layout();
    ASSERT_EQ(l->levels[1].size(), 1u);
    EXPECT_EQ(l->levels[1][0].store->find("k"), (Effect{2, 1}));
    EXPECT_EQ(look(*e, "k", d.now()), (Effect{2, 6}));
    EXPECT_EQ(look(*e, "m", d.now()), Effect::incr(4));
    EXPECT_EQ(look(*e, "j", d.now()), Effect::incr(1));
}

TEST(Engine, ProbeCounts) {
    test::ScratchDir dir("eng");
    auto e = CobbleEngine::open(dir.path(), manual_config());
    Driver d(*e);
    d.put("k", Effect::assign(2));
    d.put("other", Effect::assign(1));
    e->compact_full();
    ASSERT_EQ(e->layout()->levels[2].size(), 1u);

    std::size_t probes = 0;
    EXPECT_EQ(e->lookup_counted("k", Timestamp{d.now()}, probes), Effect::assign(2));
    EXPECT_EQ(probes, 1u);  // empty live pair skipped

    d.put("k", Effect::incr(1));
    EXPECT_EQ(e->lookup_counted("k", Timestamp{d.now()}, probes), (Effect{2, 1}));
    EXPECT_EQ(probes, 2u);

    d.put("k", Effect::assign(9));
    EXPECT_EQ(e->lookup_counted("k", Timestamp{d.now()}, probes), Effect::assign(9));
    EXPECT_EQ(probes, 1u);  // assignment in live: lower levels untouched

    EXPECT_EQ(e->lookup_counted("zzz", Timestamp{d.now()}, probes), std::nullopt);
    EXPECT_LE(probes, 1u);  // live only; the bottom shard's range excludes it
}

TEST(Engine, CompactFullRequiresNoPins) {
    test::ScratchDir dir("eng");
    auto e = CobbleEngine::open(dir.path(), manual_config());
    auto t = test::descriptor("A", 0);
    e->doBegin(t);
    EXPECT_THROW(e->compact_full(), TxnStateError);
    e->doAbort(t);
    EXPECT_NO_THROW(e->compact_full());
}

TEST(Engine, MatchesOracleWithAutomaticMaintenance) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        test::ScratchDir dir("eng");
        const auto trace = oracle::generate_trace(seed);
        auto e = CobbleEngine::open(dir.path(), small_engine_config());
        oracle::replay_against(*e, trace);
        auto rep = check_against_oracle(*e, trace, e->readHorizon(), "auto");
        ASSERT_TRUE(rep.ok()) << rep.failures.front();
        EXPECT_EQ(e->maintenance_errors(), 0u);
    }
}

TEST(Engine, CleanReopenIsEquivalent) {
    test::ScratchDir dir("eng");
    const auto trace = oracle::generate_trace(77);
    {
        auto e = CobbleEngine::open(dir.path(), small_engine_config());
        oracle::replay_against(*e, trace);
    }
    auto e = CobbleEngine::open(dir.path(), small_engine_config());
    ASSERT_TRUE(e->recovered_floor().has_value());
    EXPECT_GE(e->recovered_floor()->value + 1, trace.end().value);
    auto rep = check_against_oracle(*e, trace, e->readHorizon(), "reopen");
    EXPECT_TRUE(rep.ok()) << rep.failures.front();

    // reopening again without new commits changes nothing
    const auto first = e->describe();
    e.reset();
    auto again = CobbleEngine::open(dir.path(), small_engine_config());
    EXPECT_EQ(again->describe(), first);
}

TEST(Engine, ReopenRestoresLevelLayout) {
    test::ScratchDir dir("eng");
    auto cfg = manual_config();
    cfg.live_capacity = 1;
    cfg.level_capacity = {1, 100};
    std::string before;
    {
        auto e = CobbleEngine::open(dir.path(), cfg);
        Driver d(*e);
        for (const char* k : {"a", "q", "c", "z", "b"}) {
            d.put(k, Effect::incr(3));
            e->rotate();
            e->compact();
        }
        before = e->describe();
    }
    auto e = CobbleEngine::open(dir.path(), cfg);
    const auto l = e->layout();
    // levels come back as they were; the live pair is folded into L0
    for (const char* level : {"L1 ", "L0 "}) {
        std::istringstream b(before);
        for (std::string line; std::getline(b, line);) {
            if (line.starts_with(level)) {
                EXPECT_NE(e->describe().find(line), std::string::npos) << line;
            }
        }
    }
    EXPECT_GE(l->levels[1].size(), 1u);
    for (const char* k : {"a", "b", "c", "q", "z"}) EXPECT_EQ(look(*e, k, e->readHorizon().value + 1), Effect::incr(3));
    EXPECT_NE(e->describe().find("L1 "), std::string::npos);
}

TEST(Engine, PersistExportsLatestState) {
    test::ScratchDir dir("eng");
    auto e = CobbleEngine::open(dir / "db", manual_config());
    Driver d(*e);
    d.put("a", Effect::assign(4));
    d.put("a", Effect::incr(1));
    e->persist(dir / "export.cb");
    const auto c = Checkpoint::load(dir / "export.cb");
    EXPECT_EQ(c->find("a"), (Effect{4, 1}));
    EXPECT_EQ(c->window(), (Window{Timestamp{0}, Timestamp{2}}));
}

TEST(Engine, ConfigValidation) {
    EngineConfig c;
    c.max_levels = 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_EQ(EngineConfig{}.capacity(0), 4u);
    EXPECT_EQ(EngineConfig{}.capacity(2), 400u);
}

// --- manifest

TEST(Manifest, AddThenRemoveAcrossTransactions) {
    test::ScratchDir dir("man");
    {
        auto m = Manifest::create(dir.path());
        m->commit({{ManifestAction::Add, 0, "a.cb", {Timestamp{0}, Timestamp{3}}, std::nullopt}}, Timestamp{1});
        m->commit({{ManifestAction::Remove, 0, "a.cb", {Timestamp{0}, Timestamp{3}}, std::nullopt}}, Timestamp{2});
        EXPECT_TRUE(m->live().empty());
    }
    auto m = Manifest::open(dir.path());
    EXPECT_TRUE(m->live().empty());
    EXPECT_EQ(m->transactions(), 2u);
    EXPECT_EQ(m->max_timestamp(), Timestamp{2});
}

TEST(Manifest, UncommittedTailIgnored) {
    test::ScratchDir dir("man");
    const ManifestEntry a{ManifestAction::Add, 0, "a.cb", {Timestamp{0}, Timestamp{3}}, std::nullopt};
    const ManifestEntry b{ManifestAction::Add, 0, "b.cb", {Timestamp{3}, Timestamp{5}}, std::nullopt};
    {
        auto m = Manifest::create(dir.path());
        m->commit({a}, Timestamp{1});
    }
    {
        auto j = PersistentJournal::recover(dir / Manifest::kFileName);
        j->appendRecord(JournalRecord::begin("m-2", Timestamp{4}));
        j->appendRecord(JournalRecord::manifest_entry("m-2", b));
        j->flush();
    }
    auto m = Manifest::open(dir.path());
    ASSERT_EQ(m->live().size(), 1u);
    EXPECT_EQ(m->live()[0], a);
}

TEST(Manifest, RemoveOfUnknownPathIsRejected) {
    test::ScratchDir dir("man");
    auto m = Manifest::create(dir.path());
    EXPECT_THROW(m->commit({{ManifestAction::Remove, 0, "ghost.cb", {Timestamp{0}, Timestamp{1}}, std::nullopt}},
                           Timestamp{1}),
                 IntegrityError);
    EXPECT_TRUE(m->live().empty());
}

}  // namespace
}  // namespace cobble
