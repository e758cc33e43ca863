#include "cobble/workload.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cobble {

namespace {

double zeta(std::uint64_t n, double theta) {
    double sum = 0;
    for (std::uint64_t i = 1; i <= n; ++i) sum += 1.0 / std::pow(static_cast<double>(i), theta);
    return sum;
}

}  // namespace

ZipfianGenerator::ZipfianGenerator(std::uint64_t n, double theta) : n_(n), theta_(theta) {
    if (n == 0) throw std::invalid_argument("zipfian: need at least one item");
    if (!(theta > 0.0) || theta == 1.0) throw std::invalid_argument("zipfian: theta must be positive and != 1");
    alpha_ = 1.0 / (1.0 - theta);
    zetan_ = zeta(n, theta);
    const double zeta2 = zeta(std::min<std::uint64_t>(n, 2), theta);
    eta_ = (1.0 - std::pow(2.0 / static_cast<double>(n), 1.0 - theta)) / (1.0 - zeta2 / zetan_);
    half_pow_theta_ = 1.0 + std::pow(0.5, theta);
}

std::uint64_t ZipfianGenerator::next(std::mt19937_64& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double uz = u * zetan_;
    if (uz < 1.0) return 0;
    if (uz < half_pow_theta_ && n_ > 1) return 1;
    const auto r = static_cast<std::uint64_t>(static_cast<double>(n_) * std::pow(eta_ * u - eta_ + 1.0, alpha_));
    return std::min(r, n_ - 1);
}

std::string_view to_string(WorkloadKind kind) {
    switch (kind) {
        case WorkloadKind::Txn:
            return "txn";
        case WorkloadKind::OldReads:
            return "old_reads";
        case WorkloadKind::TxnIncrements:
            return "txn_increments";
    }
    return "?";
}

WorkloadKind parse_workload(std::string_view name) {
    if (name == "txn") return WorkloadKind::Txn;
    if (name == "old_reads") return WorkloadKind::OldReads;
    if (name == "txn_increments") return WorkloadKind::TxnIncrements;
    throw std::invalid_argument("unknown workload: " + std::string(name));
}

OpMix mix_for(WorkloadKind kind) {
    if (kind == WorkloadKind::TxnIncrements) return {0.5, 0.3, 0.2};
    return {0.5, 0.5, 0.0};
}

std::string_view to_string(Op::Kind kind) {
    switch (kind) {
        case Op::Kind::Lookup:
            return "lookup";
        case Op::Kind::Assign:
            return "assign";
        case Op::Kind::Increment:
            return "increment";
    }
    return "?";
}

std::string key_name(std::uint64_t rank) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "user%08llu", static_cast<unsigned long long>(rank));
    return buf;
}

OpGenerator::OpGenerator(const WorkloadSpec& spec, std::uint64_t seed)
    : spec_(spec), mix_(mix_for(spec.kind)), zipf_(spec.key_space, spec.zipf_theta), rng_(seed) {}

Op OpGenerator::next() {
    Op op;
    const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    if (r < mix_.lookup) {
        op.kind = Op::Kind::Lookup;
    } else if (r < mix_.lookup + mix_.assign) {
        op.kind = Op::Kind::Assign;
    } else {
        op.kind = Op::Kind::Increment;
    }
    op.key = key_name(zipf_.next(rng_));
    if (op.kind != Op::Kind::Lookup) op.amount = std::uniform_int_distribution<std::int64_t>(1, 1000)(rng_);
    return op;
}

bool OpGenerator::next_is_old_read() {
    if (spec_.kind != WorkloadKind::OldReads) return false;
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < spec_.old_snapshot_ratio;
}

std::uint64_t OpGenerator::uniform(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi - 1)(rng_);
}

}  // namespace cobble
