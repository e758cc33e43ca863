#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <set>

#include "cobble/crash_matrix.hpp"
#include "cobble/engine.hpp"
#include "cobble/file_util.hpp"
#include "testutil.hpp"

namespace cobble {
namespace {

class CrashMatrix : public ::testing::TestWithParam<CrashCase> {};

TEST_P(CrashMatrix, RecoversPrefix) {
    const auto& c = GetParam();
    test::ScratchDir dir("crash");
    const auto out = run_crash_case(c, dir / "case");
    EXPECT_TRUE(out.error.empty()) << out.error;
    if (c.must_fire) {
        EXPECT_TRUE(out.fired) << "fault never fired";
    } else {
        EXPECT_FALSE(out.fired);
    }
    EXPECT_TRUE(out.report.ok()) << out.report.mismatches << " mismatches, first: "
                                 << (out.report.failures.empty() ? "" : out.report.failures.front());
    EXPECT_GT(out.report.checks, 0u);
}

std::string case_name(const ::testing::TestParamInfo<CrashCase>& info) {
    std::string s = info.param.name;
    for (auto& ch : s) {
        if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
    }
    return std::to_string(info.index) + "_" + s;
}

INSTANTIATE_TEST_SUITE_P(All, CrashMatrix, ::testing::ValuesIn(crash_matrix()), case_name);

TEST(CrashMatrixShape, CoversEveryPointOnEveryTarget) {
    std::set<std::pair<int, int>> seen;
    for (const auto& c : crash_matrix()) seen.insert({static_cast<int>(c.target), static_cast<int>(c.trigger.point)});
    for (auto p : {FaultPoint::BeforeFlush, FaultPoint::AfterFlushBeforeNotify, FaultPoint::AfterWalWriteBeforeManifest,
                   FaultPoint::DuringCheckpointSerialize, FaultPoint::DuringRecoveryStep}) {
        EXPECT_TRUE(seen.count({static_cast<int>(CrashTarget::PJournal), static_cast<int>(p)})) << to_string(p);
        EXPECT_TRUE(seen.count({static_cast<int>(CrashTarget::Engine), static_cast<int>(p)}) ||
                    seen.count({static_cast<int>(CrashTarget::EngineRecovery), static_cast<int>(p)}))
            << to_string(p);
    }
}

TEST(CrashCli, RecoverReportsCrashedEngine) {
    test::ScratchDir dir("crash-cli");
    {
        FaultInjector faults;
        auto e = CobbleEngine::open(dir / "db", small_engine_config(), &faults);
        faults.arm({FaultPoint::AfterWalWriteBeforeManifest, FaultAction::crash(), -1, "", 0});
        const auto trace = oracle::generate_trace(9);
        EXPECT_THROW(oracle::replay_against(*e, trace, &faults), SimulatedCrash);
    }
    const std::string cmd = std::string(COBBLE_CLI) + " recover --dir " + (dir / "db").string() + " > " +
                            (dir / "out.txt").string();
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    const auto text = read_file(dir / "out.txt");
    EXPECT_NE(text.find("floor"), std::string::npos) << text;
}

}  // namespace
}  // namespace cobble
