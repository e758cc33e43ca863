#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cobble/effect.hpp"
#include "cobble/store.hpp"

namespace cobble {

class FaultInjector;

namespace oracle {

struct Step {
    enum class Kind { Begin, Update, Commit, Abort };
    Kind kind = Kind::Begin;
    std::string txn_id;
    Timestamp ts;               // st for Begin, ct for Commit
    std::optional<Key> key;     // Update only
    Effect effect;              // Update only; an assignment or an increment

    friend bool operator==(const Step&, const Step&) = default;
};

struct TraceTxn {
    std::string id;
    Timestamp st;
    std::optional<Timestamp> ct;                // set iff committed
    std::vector<std::pair<Key, Effect>> writes;  // in issue order

    [[nodiscard]] bool committed() const noexcept { return ct.has_value(); }
};

// An interleaved schedule plus the per-transaction view derived from it.
struct Trace {
    std::vector<Step> steps;
    std::vector<TraceTxn> txns;

    // Derives txns from steps. Throws std::invalid_argument when malformed.
    static Trace from_steps(std::vector<Step> steps);

    // The first n steps; transactions not committed within them count as
    // uncommitted.
    [[nodiscard]] Trace prefix(std::size_t n) const;
    [[nodiscard]] std::vector<Key> keys() const;
    // One past the largest timestamp in the trace.
    [[nodiscard]] Timestamp end() const;
};

struct TraceParams {
    std::size_t keys = 16;
    std::size_t txn_count = 200;
    std::size_t max_concurrency = 8;
    double incr_ratio = 0.5;
    double abort_ratio = 0.1;
    std::size_t max_writes = 4;
};

// Expected consolidated effect of `key` for a reader at read_st; nullopt when
// no visible committed transaction wrote it.
[[nodiscard]] std::optional<Effect> valuation(const Trace& trace, const Key& key, Timestamp read_st);

// Throws std::invalid_argument on duplicate commit timestamps, ct < st, or a
// commit that lands below a snapshot already handed out.
void validate(const Trace& trace);

[[nodiscard]] Trace generate_trace(std::uint64_t seed, const TraceParams& params = {});

// Drives the store through the schedule with the trace's own timestamps.
// `completed`, when given, tracks how many steps finished, which is what a
// crash test needs after a SimulatedCrash unwinds out of here. The fault
// injector sees AfterFlushBeforeNotify after each commit, as under the
// transaction manager.
void replay_against(Store& store, const Trace& trace, FaultInjector* faults = nullptr,
                    std::size_t* completed = nullptr);

// One line per step: BEGIN id st / UPD id key ASSIGN|INCR amount /
// COMMIT id ct / ABORT id.
[[nodiscard]] std::string to_text(const Trace& trace);
[[nodiscard]] Trace from_text(std::string_view text);

}  // namespace oracle
}  // namespace cobble
