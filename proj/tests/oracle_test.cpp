#include <gtest/gtest.h>

#include "cobble/effect.hpp"
#include "cobble/oracle.hpp"

namespace cobble {
namespace {

using oracle::Step;
using oracle::Trace;

Step begin(const char* id, std::uint64_t st) { return {Step::Kind::Begin, id, Timestamp{st}, std::nullopt, {}}; }
Step upd(const char* id, const char* key, Effect e) { return {Step::Kind::Update, id, Timestamp{0}, Key(key), e}; }
Step commit(const char* id, std::uint64_t ct) { return {Step::Kind::Commit, id, Timestamp{ct}, std::nullopt, {}}; }
Step abort_(const char* id) { return {Step::Kind::Abort, id, Timestamp{0}, std::nullopt, {}}; }

TEST(Valuation, SingleAssign) {
    const auto t = Trace::from_steps({begin("A", 0), upd("A", "k", Effect::assign(5)), commit("A", 1)});
    EXPECT_EQ(oracle::valuation(t, "k", Timestamp{2}), Effect::assign(5));
    EXPECT_EQ(oracle::valuation(t, "k", Timestamp{1}), std::nullopt);
    EXPECT_EQ(oracle::valuation(t, "other", Timestamp{2}), std::nullopt);
}

TEST(Valuation, SequentialAssignThenIncrement) {
    const auto t = Trace::from_steps({begin("A", 0), upd("A", "k", Effect::assign(2)), commit("A", 1),
                                      begin("B", 2), upd("B", "k", Effect::incr(1)), commit("B", 2)});
    EXPECT_EQ(oracle::valuation(t, "k", Timestamp{3}), (Effect{2, 1}));
}

TEST(Valuation, ConcurrentIncrements) {
    const auto t = Trace::from_steps({begin("A", 0), begin("B", 0), upd("A", "k", Effect::incr(1)),
                                      upd("B", "k", Effect::incr(3)), commit("B", 1), commit("A", 2)});
    EXPECT_EQ(oracle::valuation(t, "k", Timestamp{3}), Effect::incr(4));
}

TEST(Valuation, AgreesWithCollapseOnThreeWayConcurrency) {
    const auto t = Trace::from_steps({begin("A", 0), begin("B", 0), begin("C", 0),
                                      upd("A", "k", Effect::assign(2)), upd("B", "k", Effect::incr(5)),
                                      upd("C", "k", Effect::assign(9)), commit("A", 1), commit("B", 2),
                                      commit("C", 3)});
    EXPECT_EQ(oracle::valuation(t, "k", Timestamp{4}), (Effect{9, 5}));
}

TEST(Valuation, AbortedAndOpenTransactionsInvisible) {
    const auto t = Trace::from_steps({begin("A", 0), upd("A", "k", Effect::assign(1)), abort_("A"),
                                      begin("B", 0), upd("B", "k", Effect::assign(2))});
    EXPECT_EQ(oracle::valuation(t, "k", Timestamp{10}), std::nullopt);
}

TEST(GenerateTrace, Deterministic) {
    EXPECT_EQ(oracle::to_text(oracle::generate_trace(5)), oracle::to_text(oracle::generate_trace(5)));
    EXPECT_NE(oracle::to_text(oracle::generate_trace(5)), oracle::to_text(oracle::generate_trace(6)));
}

TEST(GenerateTrace, ShapeFollowsParams) {
    oracle::TraceParams p;
    p.keys = 4;
    p.txn_count = 100;
    const auto t = oracle::generate_trace(3, p);
    EXPECT_EQ(t.txns.size(), 100u);
    EXPECT_LE(t.keys().size(), 4u);
    std::size_t committed = 0;
    for (const auto& x : t.txns) committed += x.committed() ? 1 : 0;
    EXPECT_GT(committed, 60u);
    EXPECT_LT(committed, 100u);
}

TEST(GenerateTrace, AlwaysValid) {
    oracle::TraceParams p;
    p.txn_count = 50;
    for (std::uint64_t seed = 0; seed < 10'000; ++seed) {
        ASSERT_NO_THROW(oracle::validate(oracle::generate_trace(seed, p))) << seed;
    }
}

TEST(GenerateTrace, SequentialWhenConcurrencyIsOne) {
    oracle::TraceParams p;
    p.max_concurrency = 1;
    p.abort_ratio = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto t = oracle::generate_trace(seed, p);
        std::vector<const oracle::TraceTxn*> by_ct;
        for (const auto& x : t.txns) by_ct.push_back(&x);
        std::sort(by_ct.begin(), by_ct.end(), [](auto* a, auto* b) { return *a->ct < *b->ct; });
        for (const auto& key : t.keys()) {
            std::optional<Effect> fold;
            for (const auto* x : by_ct) {
                for (const auto& [k, e] : x->writes) {
                    if (k == key) fold = apply(fold.value_or(Effect::identity()), e);
                }
            }
            ASSERT_EQ(oracle::valuation(t, key, t.end()), fold);
        }
    }
}

TEST(Validate, RejectsBrokenTraces) {
    // duplicate ct
    EXPECT_THROW(oracle::validate(Trace::from_steps({begin("A", 0), begin("B", 0), commit("A", 1), commit("B", 1)})),
                 std::invalid_argument);
    // ct below st
    EXPECT_THROW(oracle::validate(Trace::from_steps({begin("A", 5), commit("A", 4)})), std::invalid_argument);
    // a commit below a snapshot already handed out
    EXPECT_THROW(oracle::validate(Trace::from_steps({begin("A", 0), begin("B", 3), commit("A", 2)})),
                 std::invalid_argument);
    EXPECT_NO_THROW(oracle::validate(Trace::from_steps({begin("A", 0), commit("A", 0)})));
}

TEST(Trace, MalformedStepsRejected) {
    EXPECT_THROW((void)Trace::from_steps({upd("A", "k", Effect::incr(1))}), std::invalid_argument);
    EXPECT_THROW((void)Trace::from_steps({begin("A", 0), begin("A", 1)}), std::invalid_argument);
    EXPECT_THROW((void)Trace::from_steps({begin("A", 0), commit("A", 1), abort_("A")}), std::invalid_argument);
}

TEST(Trace, TextRoundTrip) {
    const auto t = oracle::generate_trace(17);
    const auto back = oracle::from_text(oracle::to_text(t));
    EXPECT_EQ(back.steps, t.steps);
}

TEST(Trace, PrefixDropsLaterCommits) {
    const auto t = Trace::from_steps({begin("A", 0), upd("A", "k", Effect::assign(1)), commit("A", 1)});
    EXPECT_FALSE(t.prefix(2).txns[0].committed());
    EXPECT_TRUE(t.prefix(3).txns[0].committed());
    EXPECT_EQ(t.end(), Timestamp{2});
}

}  // namespace
}  // namespace cobble
