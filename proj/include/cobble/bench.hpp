#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "cobble/engine.hpp"
#include "cobble/transaction.hpp"
#include "cobble/workload.hpp"

namespace cobble {

enum class StoreKind { Map, Journal, PJournal, Cobble };

std::string_view to_string(StoreKind kind);
// "map", "journal", "pjournal", "cobble"; throws std::invalid_argument.
StoreKind parse_store(std::string_view name);

// Fresh store of the given kind. Persistent kinds live under `dir`, which is
// wiped first.
StoreHandle make_store(StoreKind kind, const std::filesystem::path& dir, const EngineConfig& engine = {});

// Log-bucketed latency histogram in nanoseconds: 16 sub-buckets per power of
// two, so quantiles are accurate to about 6%.
class LatencyHistogram {
public:
    void record(std::uint64_t ns);
    void merge(const LatencyHistogram& other);
    [[nodiscard]] std::uint64_t count() const noexcept { return count_; }
    // Microseconds; 0 when empty.
    [[nodiscard]] double quantile_us(double q) const;

private:
    static constexpr std::size_t kSub = 16;
    static constexpr std::size_t kBuckets = 64 * kSub;
    static std::size_t bucket(std::uint64_t ns);
    static double bucket_mid(std::size_t b);

    std::array<std::uint64_t, kBuckets> counts_{};
    std::uint64_t count_ = 0;
};

struct LatencySummary {
    std::uint64_t count = 0;
    double p50_us = 0;
    double p95_us = 0;
    double p99_us = 0;
};

struct BenchConfig {
    StoreKind store = StoreKind::Map;
    WorkloadSpec spec;
    Isolation isolation = Isolation::TCC;
    std::uint64_t seed = 1;
    std::filesystem::path dir = "bench-data";
    EngineConfig engine;
};

struct BenchReport {
    std::string workload;
    std::string store;
    std::size_t threads = 0;
    std::string isolation;
    std::uint64_t ops = 0;      // operations of committed transactions
    std::uint64_t txns = 0;     // committed transactions
    std::uint64_t aborts = 0;   // conflict aborts, each retried
    std::uint64_t old_reads = 0;
    double wall_sec = 0;
    double throughput_ops_s = 0;
    LatencySummary overall;                        // every timed call
    std::map<std::string, LatencySummary> per_op;  // lookup, assign, increment, commit
    std::uint64_t probes = 0;                      // cobble only
    std::string error;                             // set when a store failure cut the run short

    [[nodiscard]] static std::string csv_header();
    [[nodiscard]] std::string csv_row() const;
    [[nodiscard]] std::string table() const;
};

// Runs spec.threads clients against a fresh store and reports. A store
// failure stops the run and is recorded in `error`.
BenchReport run_workload(const BenchConfig& cfg);

}  // namespace cobble
