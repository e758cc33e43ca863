#include <gtest/gtest.h>

#include <thread>

#include "cobble/equivalence.hpp"
#include "cobble/errors.hpp"
#include "cobble/journal_store.hpp"
#include "cobble/map_store.hpp"
#include "testutil.hpp"

namespace cobble {
namespace {

using test::look;
using test::run_txn;

template <typename S>
class BothStores : public ::testing::Test {
protected:
    S store;
};

using StoreTypes = ::testing::Types<MapStore, JournalStore>;
TYPED_TEST_SUITE(BothStores, StoreTypes);

TYPED_TEST(BothStores, EmptyIsAbsent) {
    EXPECT_EQ(look(this->store, "k", 0), std::nullopt);
    EXPECT_EQ(look(this->store, "k", 100), std::nullopt);
}

TYPED_TEST(BothStores, AssignThenIncrement) {
    run_txn(this->store, "A", 0, 1, {{"k", Effect::assign(2)}});
    run_txn(this->store, "B", 2, 2, {{"k", Effect::incr(1)}});
    EXPECT_EQ(look(this->store, "k", 3), (Effect{2, 1}));
    EXPECT_EQ(look(this->store, "k", 2), Effect::assign(2));
    EXPECT_EQ(look(this->store, "k", 1), std::nullopt);
}

TYPED_TEST(BothStores, ConcurrentIncrementsMerge) {
    auto a = test::descriptor("A", 0);
    auto b = test::descriptor("B", 0);
    this->store.doBegin(a);
    this->store.doBegin(b);
    a.effect_buffer[Key("k")] = Effect::incr(1);
    b.effect_buffer[Key("k")] = Effect::incr(3);
    this->store.doUpdate(a, "k", Effect::incr(1));
    this->store.doUpdate(b, "k", Effect::incr(3));
    b.ct = Timestamp{1};
    this->store.doCommit(b);
    a.ct = Timestamp{2};
    this->store.doCommit(a);
    EXPECT_EQ(look(this->store, "k", 3), Effect::incr(4));
    EXPECT_EQ(look(this->store, "k", 2), Effect::incr(3));
}

TYPED_TEST(BothStores, AbortedWritesInvisible) {
    auto d = test::descriptor("A", 0);
    this->store.doBegin(d);
    d.effect_buffer[Key("k")] = Effect::assign(9);
    this->store.doUpdate(d, "k", Effect::assign(9));
    this->store.doAbort(d);
    for (std::uint64_t t = 0; t < 5; ++t) EXPECT_EQ(look(this->store, "k", t), std::nullopt);
}

TYPED_TEST(BothStores, MultiKeyCommitIsAtomic) {
    run_txn(this->store, "A", 0, 3, {{"k1", Effect::assign(1)}, {"k2", Effect::assign(2)}});
    for (std::uint64_t t = 0; t < 6; ++t) {
        EXPECT_EQ(look(this->store, "k1", t).has_value(), look(this->store, "k2", t).has_value());
    }
}

TYPED_TEST(BothStores, DoubleBeginThrows) {
    const auto d = test::descriptor("A", 0);
    this->store.doBegin(d);
    EXPECT_THROW(this->store.doBegin(d), TxnStateError);
}

TYPED_TEST(BothStores, UpdateAfterCommitThrows) {
    const auto d = run_txn(this->store, "A", 0, 1, {{"k", Effect::assign(1)}});
    EXPECT_THROW(this->store.doUpdate(d, "k", Effect::incr(1)), TxnStateError);
}

TYPED_TEST(BothStores, MatchesOracleOnRandomTraces) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        TypeParam s;
        oracle::TraceParams p;
        p.txn_count = 50;
        const auto trace = oracle::generate_trace(seed, p);
        oracle::replay_against(s, trace);
        const auto rep = check_against_oracle(s, trace, Timestamp{0}, "seed " + std::to_string(seed));
        ASSERT_TRUE(rep.ok()) << rep.failures.front();
    }
}

TEST(JournalStore, RecordsInOrder) {
    JournalStore j;
    auto d = test::descriptor("A", 0);
    j.doBegin(d);
    ASSERT_EQ(j.size(), 1u);
    EXPECT_EQ(j.records().back().kind, RecordKind::Begin);
    j.doUpdate(d, "k1", Effect::assign(1));
    EXPECT_EQ(j.records().back(), JournalRecord::update("A", Key("k1"), Effect::assign(1)));
    j.doUpdate(d, "k2", Effect::assign(2));
    d.ct = Timestamp{1};
    j.doCommit(d);
    const auto recs = j.records();
    ASSERT_EQ(recs.size(), 4u);
    EXPECT_EQ(recs[0].kind, RecordKind::Begin);
    EXPECT_EQ(recs[1].kind, RecordKind::Update);
    EXPECT_EQ(recs[2].kind, RecordKind::Update);
    EXPECT_EQ(recs[3], JournalRecord::commit("A", Timestamp{1}));
}

TEST(JournalStore, PersistRecoverRoundTrip) {
    test::ScratchDir dir("journal");
    JournalStore j;
    const auto trace = oracle::generate_trace(4);
    oracle::replay_against(j, trace);
    j.persist(dir / "j.log");
    const auto back = JournalStore::recover(dir / "j.log");
    EXPECT_EQ(back->records(), j.records());
    EXPECT_THROW((void)JournalStore::recover(dir / "missing.log"), IoError);
}

TEST(MapStore, BeginAndUpdateLeaveSharedStateAlone) {
    MapStore m;
    run_txn(m, "A", 0, 1, {{"k", Effect::assign(1)}});
    const auto before = m.versions("k");
    auto d = test::descriptor("B", 2);
    m.doBegin(d);
    m.doUpdate(d, "k", Effect::incr(5));
    EXPECT_EQ(m.versions("k").size(), before.size());
    EXPECT_EQ(m.committedEffects(), 1u);
}

TEST(MapStore, CommitAddsOneVersion) {
    MapStore m;
    run_txn(m, "A", 0, 4, {{"k", Effect::assign(1)}});
    const auto v = m.versions("k");
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].ct, Timestamp{4});
    run_txn(m, "B", 5, 5, {});
    EXPECT_EQ(m.versions("k").size(), 1u);
}

TEST(MapStore, ConcurrentCommitsStaySorted) {
    MapStore m;
    constexpr int kThreads = 4, kPer = 500;
    std::atomic<std::uint64_t> ct{1};
    std::mutex order;  // hand out ct and commit in the same critical section
    std::vector<std::thread> ts;
    for (int t = 0; t < kThreads; ++t) {
        ts.emplace_back([&, t] {
            for (int i = 0; i < kPer; ++i) {
                auto d = test::descriptor("t" + std::to_string(t) + "-" + std::to_string(i), 0);
                m.doBegin(d);
                d.effect_buffer[Key("k")] = Effect::incr(1);
                m.doUpdate(d, "k", Effect::incr(1));
                std::lock_guard lock(order);
                d.ct = Timestamp{ct++};
                m.doCommit(d);
            }
        });
    }
    for (auto& t : ts) t.join();
    const auto v = m.versions("k");
    ASSERT_EQ(v.size(), std::size_t{kThreads * kPer});
    EXPECT_TRUE(std::is_sorted(v.begin(), v.end(), [](const Version& a, const Version& b) { return a.ct < b.ct; }));
    EXPECT_EQ(look(m, "k", ct.load()), Effect::incr(kThreads * kPer));
}

TEST(MapStore, PersistRequiresSealAndRoundTrips) {
    test::ScratchDir dir("map");
    MapStore m;
    run_txn(m, "A", 0, 1, {{"a", Effect::assign(3)}});
    run_txn(m, "B", 0, 2, {{"a", Effect::incr(2)}, {"b", Effect::incr(1)}});
    run_txn(m, "C", 3, 3, {{"b", Effect::assign(7)}});
    EXPECT_THROW(m.persist(dir / "m.cb"), TxnStateError);
    m.seal(Timestamp{4});
    m.persist(dir / "m.cb");
    const auto back = MapStore::recover(dir / "m.cb");
    EXPECT_TRUE(back->sealed());
    for (const char* k : {"a", "b", "c"}) {
        for (std::uint64_t t = 0; t <= 4; ++t) EXPECT_EQ(look(*back, k, t), look(m, k, t)) << k << t;
    }
    EXPECT_THROW((void)MapStore::recover(dir / "nope.cb"), IoError);
}

TEST(MapStore, ReadBelowWindowThrows) {
    MapStore m(Window{Timestamp{10}, std::nullopt});
    EXPECT_THROW((void)look(m, "k", 5), WindowViolation);
}

}  // namespace
}  // namespace cobble
