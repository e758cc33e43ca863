#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cobble/equivalence.hpp"
#include "cobble/fault.hpp"

namespace cobble {

enum class CrashTarget {
    PJournal,        // persistent journal driven by a trace
    Engine,          // engine with small capacities, so it rotates and compacts
    EngineOneWal,    // engine that never rotates; WAL frames map to trace steps
    EngineRecovery,  // crash while reopening an engine left with open transactions
};

struct CrashCase {
    std::string name;
    CrashTarget target = CrashTarget::PJournal;
    FaultTrigger trigger;
    std::uint64_t seed = 1;
    bool must_fire = true;  // false for points the target never reaches
};

struct CrashOutcome {
    bool fired = false;
    std::size_t completed = 0;       // trace steps finished before the crash
    std::size_t expected_steps = 0;  // the prefix the recovered state must equal
    EquivalenceReport report;
    std::string error;               // anything unexpected

    [[nodiscard]] bool ok(const CrashCase& c) const {
        return error.empty() && report.ok() && (fired || !c.must_fire);
    }
};

// Runs the case in `scratch` (wiped first, removed after): drive the target
// with the fault armed, abandon it when the fault fires, recover from what is
// on disk and compare every key at every readable timestamp with the oracle
// over the prefix of the trace that must have survived.
CrashOutcome run_crash_case(const CrashCase& c, const std::filesystem::path& scratch);

// Every fault point against every target, at several hit counts.
std::vector<CrashCase> crash_matrix();

}  // namespace cobble
