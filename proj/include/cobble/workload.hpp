#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "cobble/store.hpp"

namespace cobble {

// YCSB-style zipfian ranks in [0, n); rank 0 is the most popular.
class ZipfianGenerator {
public:
    explicit ZipfianGenerator(std::uint64_t n, double theta = 0.99);

    std::uint64_t next(std::mt19937_64& rng) const;

    [[nodiscard]] std::uint64_t items() const noexcept { return n_; }
    [[nodiscard]] double theta() const noexcept { return theta_; }

private:
    std::uint64_t n_;
    double theta_;
    double alpha_;
    double zetan_;
    double eta_;
    double half_pow_theta_;
};

enum class WorkloadKind { Txn, OldReads, TxnIncrements };

std::string_view to_string(WorkloadKind kind);
// "txn", "old_reads", "txn_increments"; throws std::invalid_argument.
WorkloadKind parse_workload(std::string_view name);

struct OpMix {
    double lookup = 0.5;
    double assign = 0.5;
    double increment = 0.0;
};

OpMix mix_for(WorkloadKind kind);

struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::Txn;
    std::size_t ops_per_txn = 5;
    double zipf_theta = 0.99;
    std::size_t key_space = 10'000;
    double duration_sec = 10.0;
    std::optional<std::size_t> txn_count;  // per thread; overrides duration when set
    std::size_t threads = 1;
    double old_snapshot_ratio = 0.5;       // old_reads only
};

struct Op {
    enum class Kind { Lookup, Assign, Increment };
    Kind kind = Kind::Lookup;
    std::string key;
    std::int64_t amount = 0;

    friend bool operator==(const Op&, const Op&) = default;
};

std::string_view to_string(Op::Kind kind);

// Deterministic operation stream for one client.
class OpGenerator {
public:
    OpGenerator(const WorkloadSpec& spec, std::uint64_t seed);

    Op next();
    // old_reads: whether the next transaction reads from an older snapshot.
    bool next_is_old_read();
    // Uniform in [lo, hi); requires lo < hi.
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);

private:
    WorkloadSpec spec_;
    OpMix mix_;
    ZipfianGenerator zipf_;
    std::mt19937_64 rng_;
};

std::string key_name(std::uint64_t rank);

}  // namespace cobble
