#include "cobble/crash_matrix.hpp"

#include <algorithm>
#include <random>

#include "cobble/codec.hpp"
#include "cobble/engine.hpp"
#include "cobble/file_util.hpp"
#include "cobble/persistent_journal.hpp"

namespace cobble {

namespace {

namespace fs = std::filesystem;

EngineConfig one_wal_config() {
    EngineConfig cfg;
    cfg.max_levels = 3;
    cfg.live_capacity = 100;
    cfg.wmp_rotate_effects = 1'000'000;
    cfg.level_capacity = {100, 100};
    return cfg;
}

// The engine only rotates while nothing is pinned, so its traces keep fewer
// transactions open at once.
oracle::TraceParams crash_params(CrashTarget t) {
    oracle::TraceParams p;
    p.txn_count = 120;
    if (t != CrashTarget::PJournal) p.max_concurrency = 2;
    return p;
}

// Faults that fire after the current commit already reached the disk.
bool fired_after_durable(const CrashCase& c, const FaultInjector& faults) {
    switch (c.trigger.point) {
        case FaultPoint::AfterFlushBeforeNotify:
        case FaultPoint::AfterWalWriteBeforeManifest:
        case FaultPoint::DuringCheckpointSerialize:
            return true;
        case FaultPoint::BeforeFlush: {
            const auto p = faults.fired_path().value_or("");
            return p.find(Manifest::kFileName) != std::string::npos;
        }
        case FaultPoint::DuringRecoveryStep:
            return false;
    }
    return false;
}

// Step index of the first frame a truncation or corruption destroys, given
// the frame layout of an undisturbed run.
std::size_t first_damaged_frame(const FaultAction& a, const std::vector<codec::ScannedFrame>& frames) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto lo = frames[i].offset;
        const auto hi = lo + frames[i].payload.size() + codec::kFrameOverhead;
        if (a.kind == FaultAction::Kind::TruncateAt && a.offset < hi) return i;
        if (a.kind == FaultAction::Kind::CorruptBytes && a.offset < hi && a.offset + a.length > lo) return i;
    }
    return frames.size();
}

bool damages_file(const FaultAction& a) {
    return a.kind == FaultAction::Kind::TruncateAt || a.kind == FaultAction::Kind::CorruptBytes;
}

std::vector<codec::ScannedFrame> clean_frames(const CrashCase& c, const oracle::Trace& trace, const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::path file;
    if (c.target == CrashTarget::PJournal) {
        file = dir / "j.log";
        auto j = PersistentJournal::create(file);
        oracle::replay_against(*j, trace);
        j->close();
    } else {
        auto e = CobbleEngine::open(dir, one_wal_config());
        oracle::replay_against(*e, trace);
        file = dir / "wal-0.log";
    }
    const auto bytes = read_file(file);
    auto frames = codec::scan_frames(bytes).frames;
    // an engine left open keeps its unflushed tail in memory; what is on disk is a step prefix
    if (frames.size() > trace.steps.size()) throw IntegrityError("crash matrix: frames do not map to steps");
    return frames;
}

std::shared_ptr<Store> open_target(const CrashCase& c, const fs::path& dir, FaultInjector* faults, bool fresh) {
    switch (c.target) {
        case CrashTarget::PJournal:
            return fresh ? PersistentJournal::create(dir / "j.log", {Timestamp{0}, std::nullopt}, faults)
                         : PersistentJournal::recover(dir / "j.log", {Timestamp{0}, std::nullopt}, faults);
        case CrashTarget::Engine:
        case CrashTarget::EngineRecovery:
            return CobbleEngine::open(dir, small_engine_config(), faults);
        case CrashTarget::EngineOneWal:
            return CobbleEngine::open(dir, one_wal_config(), faults);
    }
    return nullptr;
}

CrashOutcome run_recovery_case(const CrashCase& c, const oracle::Trace& trace, const fs::path& scratch) {
    CrashOutcome out;
    const auto dir = scratch / "db";
    const auto ref = scratch / "ref";
    const std::size_t n = trace.steps.size() * 2 / 3;
    out.completed = n;
    out.expected_steps = n;
    {
        auto e = open_target(c, dir, nullptr, true);
        oracle::replay_against(*e, trace.prefix(n));
    }
    fs::copy(dir, ref, fs::copy_options::recursive);

    // crash twice in the same place, then recover cleanly
    for (int round = 0; round < 2; ++round) {
        FaultInjector faults;
        faults.arm(c.trigger);
        try {
            (void)open_target(c, dir, &faults, false);
        } catch (const SimulatedCrash&) {
        }
        out.fired = out.fired || faults.fired();
    }
    const auto keys = trace.keys();
    const auto expect = trace.prefix(n);
    auto e = std::dynamic_pointer_cast<CobbleEngine>(open_target(c, dir, nullptr, false));
    auto r = std::dynamic_pointer_cast<CobbleEngine>(open_target(c, ref, nullptr, false));
    out.report.merge(check_against_oracle(*e, expect, e->readHorizon(), c.name, trace.end(), &keys));
    out.report.merge(check_against_oracle(*r, expect, r->readHorizon(), c.name + " crash-free", trace.end(), &keys));
    if (e->recovered_floor() != r->recovered_floor()) out.error = "recovered floor differs from crash-free recovery";
    if (e->readHorizon() != r->readHorizon()) out.error = "read horizon differs from crash-free recovery";
    return out;
}

}  // namespace

CrashOutcome run_crash_case(const CrashCase& c, const fs::path& scratch) {
    CrashOutcome out;
    const auto trace = oracle::generate_trace(c.seed, crash_params(c.target));
    fs::remove_all(scratch);
    fs::create_directories(scratch);
    try {
        if (c.target == CrashTarget::EngineRecovery) {
            out = run_recovery_case(c, trace, scratch);
        } else {
            std::vector<codec::ScannedFrame> frames;
            if (damages_file(c.trigger.action)) frames = clean_frames(c, trace, scratch / "clean");

            const auto dir = scratch / "db";
            fs::create_directories(dir);
            FaultInjector faults;
            bool crashed = false;
            {
                // armed only after opening, so setup writes never fire
                auto s = open_target(c, dir, &faults, true);
                faults.arm(c.trigger);
                try {
                    oracle::replay_against(*s, trace, &faults, &out.completed);
                } catch (const SimulatedCrash&) {
                    crashed = true;
                } catch (const IoError&) {
                    crashed = true;  // injected flush failure; the process gives up
                }
            }
            out.fired = faults.fired();
            if (!crashed) {
                out.expected_steps = trace.steps.size();
            } else {
                out.expected_steps = out.completed + (fired_after_durable(c, faults) ? 1 : 0);
                if (damages_file(c.trigger.action)) {
                    out.expected_steps = std::min(out.expected_steps, first_damaged_frame(c.trigger.action, frames));
                }
            }

            const auto keys = trace.keys();
            const auto expect = trace.prefix(out.expected_steps);
            auto s = open_target(c, dir, nullptr, false);
            out.report = check_against_oracle(*s, expect, s->readHorizon(), c.name, trace.end(), &keys);
        }
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    std::error_code ec;
    fs::remove_all(scratch, ec);
    return out;
}

std::vector<CrashCase> crash_matrix() {
    std::vector<CrashCase> cases;
    const auto add = [&cases](std::string name, CrashTarget t, FaultTrigger trig, bool must_fire = true) {
        const auto seed = 100 + cases.size();
        cases.push_back({std::move(name), t, std::move(trig), seed, must_fire});
    };
    const auto crash = FaultAction::crash();
    std::mt19937_64 rng(7);

    for (int skip : {0, 3, 17, 60}) {
        add("pjournal before-flush #" + std::to_string(skip), CrashTarget::PJournal,
            {FaultPoint::BeforeFlush, crash, -1, "", skip});
        add("pjournal after-flush-before-notify #" + std::to_string(skip), CrashTarget::PJournal,
            {FaultPoint::AfterFlushBeforeNotify, crash, -1, "", skip});
    }
    add("pjournal flush failure", CrashTarget::PJournal, {FaultPoint::BeforeFlush, FaultAction::fail_flush(), -1, "", 5});
    for (int skip : {10, 30, 70}) {
        add("pjournal truncate #" + std::to_string(skip), CrashTarget::PJournal,
            {FaultPoint::BeforeFlush, FaultAction::truncate_at(rng() % 6000), -1, "", skip});
        add("pjournal corrupt #" + std::to_string(skip), CrashTarget::PJournal,
            {FaultPoint::BeforeFlush, FaultAction::corrupt(rng() % 6000, 3), -1, "", skip});
    }
    add("pjournal never reaches wal-write-before-manifest", CrashTarget::PJournal,
        {FaultPoint::AfterWalWriteBeforeManifest, crash, -1, "", 0}, false);
    add("pjournal never reaches checkpoint-serialize", CrashTarget::PJournal,
        {FaultPoint::DuringCheckpointSerialize, crash, -1, "", 0}, false);
    add("pjournal never reaches recovery-step", CrashTarget::PJournal,
        {FaultPoint::DuringRecoveryStep, crash, 0, "", 0}, false);

    for (int skip : {0, 7, 50}) {
        add("engine wal before-flush #" + std::to_string(skip), CrashTarget::Engine,
            {FaultPoint::BeforeFlush, crash, -1, "wal-", skip});
        add("engine after-flush-before-notify #" + std::to_string(skip), CrashTarget::Engine,
            {FaultPoint::AfterFlushBeforeNotify, crash, -1, "", skip});
    }
    for (int skip : {0, 2, 5}) {
        add("engine manifest before-flush #" + std::to_string(skip), CrashTarget::Engine,
            {FaultPoint::BeforeFlush, crash, -1, std::string(Manifest::kFileName), skip});
    }
    for (int skip : {0, 1, 3, 6}) {
        add("engine wal-write-before-manifest #" + std::to_string(skip), CrashTarget::Engine,
            {FaultPoint::AfterWalWriteBeforeManifest, crash, -1, "", skip});
    }
    for (int skip : {0, 1, 4}) {
        add("engine checkpoint-serialize #" + std::to_string(skip), CrashTarget::Engine,
            {FaultPoint::DuringCheckpointSerialize, crash, -1, "", skip});
    }
    add("engine wal flush failure", CrashTarget::Engine,
        {FaultPoint::BeforeFlush, FaultAction::fail_flush(), -1, "wal-", 12});
    add("engine manifest flush failure", CrashTarget::Engine,
        {FaultPoint::BeforeFlush, FaultAction::fail_flush(), -1, std::string(Manifest::kFileName), 1});
    for (int skip : {10, 40}) {
        add("engine wal truncate #" + std::to_string(skip), CrashTarget::EngineOneWal,
            {FaultPoint::BeforeFlush, FaultAction::truncate_at(rng() % 6000), -1, "wal-", skip});
        add("engine wal corrupt #" + std::to_string(skip), CrashTarget::EngineOneWal,
            {FaultPoint::BeforeFlush, FaultAction::corrupt(rng() % 6000, 2), -1, "wal-", skip});
    }
    add("engine never reaches recovery-step while running", CrashTarget::Engine,
        {FaultPoint::DuringRecoveryStep, crash, 0, "", 0}, false);
    for (int step = 0; step < CobbleEngine::kRecoverySteps; ++step) {
        add("engine recovery-step " + std::to_string(step), CrashTarget::EngineRecovery,
            {FaultPoint::DuringRecoveryStep, crash, step, "", 0});
    }
    return cases;
}

}  // namespace cobble
