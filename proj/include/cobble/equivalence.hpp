#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cobble/engine.hpp"
#include "cobble/oracle.hpp"

namespace cobble {

struct EquivalenceReport {
    std::size_t checks = 0;
    std::size_t mismatches = 0;
    std::vector<std::string> failures;  // first few, human-readable

    void merge(const EquivalenceReport& other);
    [[nodiscard]] bool ok() const noexcept { return mismatches == 0; }
};

// Compares store.lookup with the oracle for every written key at every read
// timestamp in [from, to], `to` defaulting to trace.end(). A crash check
// passes the full trace's keys and end so that extra state is caught too.
EquivalenceReport check_against_oracle(const Store& store, const oracle::Trace& trace, Timestamp from,
                                       const std::string& label, std::optional<Timestamp> to = std::nullopt,
                                       const std::vector<Key>* keys = nullptr);

// Small capacities so that a 200-transaction trace rotates and compacts.
EngineConfig small_engine_config();

// Replays one generated trace onto every store kind (map, journal,
// persistent journal, WAL/memtable pair, engine before and after full
// compaction and after reopening) and checks each against the oracle.
// `scratch` is a directory this call may wipe.
EquivalenceReport verify_seed(std::uint64_t seed, const oracle::TraceParams& params,
                              const std::filesystem::path& scratch);

}  // namespace cobble
