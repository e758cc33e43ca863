#include <gtest/gtest.h>

#include <random>

#include "cobble/checkpoint.hpp"
#include "cobble/codec.hpp"
#include "cobble/composed_store.hpp"
#include "cobble/equivalence.hpp"
#include "cobble/errors.hpp"
#include "cobble/file_util.hpp"
#include "cobble/journal_store.hpp"
#include "cobble/map_store.hpp"
#include "cobble/wal_memtable_pair.hpp"
#include "testutil.hpp"

namespace cobble {
namespace {

using test::look;
using test::run_txn;

const Window kOpen{Timestamp{0}, std::nullopt};

TEST(ComposedStore, SingleMinistoreIsTransparent) {
    const auto trace = oracle::generate_trace(8);
    auto inner = std::make_shared<MapStore>();
    ComposedStore c({{inner, 0}});
    oracle::replay_against(c, trace);
    const auto rep = check_against_oracle(c, trace, Timestamp{0}, "single");
    EXPECT_TRUE(rep.ok()) << rep.failures.front();
    for (const auto& k : trace.keys()) EXPECT_EQ(look(c, k, trace.end().value), look(*inner, k, trace.end().value));
}

TEST(ComposedStore, ReplicasAllReceiveWrites) {
    auto a = std::make_shared<MapStore>();
    auto b = std::make_shared<JournalStore>();
    ComposedStore c({{a, 1}, {b, 0}});
    run_txn(c, "A", 0, 1, {{"k", Effect::assign(2)}});
    run_txn(c, "B", 2, 2, {{"k", Effect::incr(1)}});
    EXPECT_EQ(look(*a, "k", 3), (Effect{2, 1}));
    EXPECT_EQ(look(*b, "k", 3), (Effect{2, 1}));
    EXPECT_EQ(look(c, "k", 3), (Effect{2, 1}));
    EXPECT_EQ(b->size(), 6u);
}

TEST(ComposedStore, TiledWindowsFoldOldestFirst) {
    auto old_part = std::make_shared<MapStore>();
    JournalStore reference;
    const auto both = [&](Store& s, const char* id, std::uint64_t st, std::uint64_t ct, const test::Writes& w) {
        run_txn(s, id, st, ct, w);
        run_txn(reference, id, st, ct, w);
    };
    both(*old_part, "A", 0, 3, {{"x", Effect::assign(5)}, {"y", Effect::incr(1)}});
    both(*old_part, "B", 4, 9, {{"x", Effect::incr(2)}});
    old_part->seal(Timestamp{10});
    auto new_part = std::make_shared<MapStore>(Window{Timestamp{10}, std::nullopt});
    ComposedStore c({{old_part, 0}, {new_part, 0}});
    EXPECT_EQ(c.window(), kOpen);
    both(c, "C", 10, 11, {{"x", Effect::incr(10)}, {"z", Effect::assign(1)}});
    both(c, "D", 12, 13, {{"y", Effect::assign(0)}});
    EXPECT_EQ(new_part->committedEffects(), 3u);
    for (const char* k : {"x", "y", "z", "w"}) {
        for (std::uint64_t t = 0; t <= 14; ++t) ASSERT_EQ(look(c, k, t), look(reference, k, t)) << k << " " << t;
    }
    EXPECT_EQ(look(c, "x", 14), (Effect{5, 12}));
}

TEST(ComposedStore, RejectsBadWindows) {
    auto open_a = std::make_shared<MapStore>();
    auto open_b = std::make_shared<MapStore>(Window{Timestamp{5}, std::nullopt});
    EXPECT_THROW(ComposedStore({{open_a, 0}, {open_b, 0}}), std::invalid_argument);

    auto sealed = std::make_shared<MapStore>();
    sealed->seal(Timestamp{4});
    EXPECT_THROW(ComposedStore({{sealed, 0}, {open_b, 0}}), std::invalid_argument);  // gap [4,5)
    EXPECT_THROW(ComposedStore({}), std::invalid_argument);
}

TEST(ComposedStore, ReadBelowWindowThrows) {
    ComposedStore c({{std::make_shared<MapStore>(Window{Timestamp{10}, std::nullopt}), 0}});
    EXPECT_THROW((void)look(c, "k", 3), WindowViolation);
}

TEST(ComposedStore, CommitOutsideWindowThrows) {
    auto sealed = std::make_shared<MapStore>();
    sealed->seal(Timestamp{4});
    ComposedStore c({{sealed, 0}});
    EXPECT_THROW(run_txn(c, "A", 5, 6, {{"k", Effect::incr(1)}}), Error);
}

// --- checkpoints

TEST(Checkpoint, FoldsSourceAtHigh) {
    MapStore m;
    run_txn(m, "A", 0, 1, {{"k", Effect::assign(2)}});
    run_txn(m, "B", 2, 2, {{"k", Effect::incr(1)}});
    m.seal(Timestamp{3});
    const auto c = Checkpoint::build(m);
    EXPECT_EQ(c->find("k"), (Effect{2, 1}));
    EXPECT_EQ(c->window(), (Window{Timestamp{0}, Timestamp{3}}));
    EXPECT_EQ(look(*c, "k", 3), (Effect{2, 1}));
    EXPECT_EQ(look(*c, "k", 0), std::nullopt);
    EXPECT_THROW((void)look(*c, "k", 2), WindowViolation);
}

TEST(Checkpoint, EmptySourceGivesEmptyCheckpoint) {
    MapStore m;
    m.seal(Timestamp{5});
    const auto c = Checkpoint::build(m);
    EXPECT_TRUE(c->entries().empty());
    EXPECT_EQ(c->key_range(), std::nullopt);
}

TEST(Checkpoint, UnsealedSourceThrows) {
    MapStore m;
    EXPECT_THROW((void)Checkpoint::build(m), TxnStateError);
}

TEST(Checkpoint, ReadOnly) {
    Checkpoint c({}, Window{Timestamp{0}, Timestamp{1}});
    EXPECT_THROW(c.doBegin(test::descriptor("A", 1)), TxnStateError);
}

TEST(Checkpoint, EqualsSourceAtOrAfterHigh) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto trace = oracle::generate_trace(seed, {.txn_count = 60});
        MapStore m;
        oracle::replay_against(m, trace);
        const auto hi = trace.end();
        m.seal(hi);
        const auto c = Checkpoint::build(m);
        for (const auto& k : trace.keys()) {
            const auto want = look(m, k, hi.value);
            for (std::uint64_t t = hi.value; t < hi.value + 3; ++t) ASSERT_EQ(look(*c, k, t), want);
        }
        EXPECT_EQ(c->key_range(), (KeyRange{trace.keys().front().str(), trace.keys().back().str()}));
    }
}

TEST(Checkpoint, WriteLoadRoundTrip) {
    test::ScratchDir dir("ckpt");
    Checkpoint c({{Key("a"), Effect::assign(1)}, {Key("b"), Effect{3, -2}}, {Key("c"), Effect::incr(9)}},
                 Window{Timestamp{4}, Timestamp{20}});
    c.write(dir / "c.cb");
    const auto back = Checkpoint::load(dir / "c.cb", c.window());
    EXPECT_EQ(back->entries(), c.entries());
    EXPECT_EQ(back->window(), c.window());
    EXPECT_THROW((void)Checkpoint::load(dir / "c.cb", Window{Timestamp{4}, Timestamp{21}}), IntegrityError);
    EXPECT_THROW((void)Checkpoint::load(dir / "missing.cb"), IoError);

    auto bytes = read_file(dir / "c.cb");
    bytes.resize(bytes.size() - 3);
    write_file_durably(dir / "short.cb", bytes);
    EXPECT_THROW((void)Checkpoint::load(dir / "short.cb"), IntegrityError);
}

TEST(Checkpoint, EmptyFileTakesExpectedWindow) {
    test::ScratchDir dir("ckpt");
    const Window w{Timestamp{3}, Timestamp{9}};
    Checkpoint({}, w).write(dir / "e.cb");
    EXPECT_EQ(Checkpoint::load(dir / "e.cb", w)->window(), w);
}

// --- WAL/memtable pairs

TEST(WalMemtablePair, UpdateGoesToWalCommitReachesBoth) {
    test::ScratchDir dir("wmp");
    auto p = WalMemtablePair::create(dir / "wal.log", kOpen);
    auto d = test::descriptor("A", 0);
    p->doBegin(d);
    d.effect_buffer[Key("k")] = Effect::assign(3);
    p->doUpdate(d, "k", Effect::assign(3));
    EXPECT_EQ(p->wal()->memory().size(), 2u);
    EXPECT_TRUE(p->memtable()->versions("k").empty());
    d.ct = Timestamp{1};
    p->doCommit(d);
    EXPECT_EQ(p->wal()->memory().records().back(), JournalRecord::commit("A", Timestamp{1}));
    EXPECT_EQ(p->memtable()->versions("k").size(), 1u);
    EXPECT_EQ(p->committedEffects(), 1u);
    EXPECT_EQ(p->maxCommitted(), Timestamp{1});
}

TEST(WalMemtablePair, WalAndMemtableReadsAgree) {
    test::ScratchDir dir("wmp");
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto trace = oracle::generate_trace(seed, {.txn_count = 80});
        auto via_map = WalMemtablePair::create(dir / ("m" + std::to_string(seed)), kOpen);
        auto via_wal = WalMemtablePair::create(dir / ("w" + std::to_string(seed)), kOpen, nullptr, true);
        oracle::replay_against(*via_map, trace);
        oracle::replay_against(*via_wal, trace);
        for (const auto& k : trace.keys()) {
            for (std::uint64_t t = 0; t <= trace.end().value; ++t) {
                ASSERT_EQ(look(*via_map, k, t), look(*via_wal, k, t));
                ASSERT_EQ(look(*via_map, k, t), look(*via_map->memtable(), k, t));
            }
        }
    }
}

TEST(WalMemtablePair, RecoverRebuildsMemtable) {
    test::ScratchDir dir("wmp");
    const auto trace = oracle::generate_trace(12, {.txn_count = 80});
    {
        auto p = WalMemtablePair::create(dir / "wal.log", kOpen);
        oracle::replay_against(*p, trace);
    }
    auto back = WalMemtablePair::recover(dir / "wal.log", kOpen);
    const auto rep = check_against_oracle(*back, trace, Timestamp{0}, "recovered");
    EXPECT_TRUE(rep.ok()) << rep.failures.front();
}

TEST(WalMemtablePair, SealClosesBothHalves) {
    test::ScratchDir dir("wmp");
    auto p = WalMemtablePair::create(dir / "wal.log", Window{Timestamp{5}, std::nullopt});
    run_txn(*p, "A", 5, 6, {{"k", Effect::incr(1)}});
    p->seal(Timestamp{7});
    EXPECT_EQ(p->window(), (Window{Timestamp{5}, Timestamp{7}}));
    EXPECT_EQ(p->wal()->window(), p->window());
    EXPECT_THROW(run_txn(*p, "B", 7, 8, {{"k", Effect::incr(1)}}), Error);
    EXPECT_THROW((void)look(*p, "k", 2), WindowViolation);
}

}  // namespace
}  // namespace cobble
