#include "cobble/bench.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "cobble/journal_store.hpp"
#include "cobble/map_store.hpp"
#include "cobble/persistent_journal.hpp"

namespace cobble {

std::string_view to_string(StoreKind kind) {
    switch (kind) {
        case StoreKind::Map:
            return "map";
        case StoreKind::Journal:
            return "journal";
        case StoreKind::PJournal:
            return "pjournal";
        case StoreKind::Cobble:
            return "cobble";
    }
    return "?";
}

StoreKind parse_store(std::string_view name) {
    if (name == "map") return StoreKind::Map;
    if (name == "journal") return StoreKind::Journal;
    if (name == "pjournal") return StoreKind::PJournal;
    if (name == "cobble") return StoreKind::Cobble;
    throw std::invalid_argument("unknown store: " + std::string(name));
}

StoreHandle make_store(StoreKind kind, const std::filesystem::path& dir, const EngineConfig& engine) {
    switch (kind) {
        case StoreKind::Map:
            return std::make_shared<MapStore>();
        case StoreKind::Journal:
            return std::make_shared<JournalStore>();
        case StoreKind::PJournal:
            std::filesystem::remove_all(dir);
            std::filesystem::create_directories(dir);
            return PersistentJournal::create(dir / "journal.log");
        case StoreKind::Cobble:
            std::filesystem::remove_all(dir);
            return CobbleEngine::open(dir, engine);
    }
    throw std::invalid_argument("unknown store kind");
}

// ---------------------------------------------------------------------------

std::size_t LatencyHistogram::bucket(std::uint64_t ns) {
    if (ns < kSub) return static_cast<std::size_t>(ns);
    const int e = std::bit_width(ns) - 1;  // ns in [2^e, 2^(e+1))
    const auto sub = static_cast<std::size_t>((ns >> (e - 4)) & (kSub - 1));
    return std::min(kBuckets - 1, static_cast<std::size_t>(e - 3) * kSub + sub);
}

double LatencyHistogram::bucket_mid(std::size_t b) {
    if (b < kSub) return static_cast<double>(b);
    const auto e = static_cast<int>(b / kSub) + 3;
    const auto sub = static_cast<double>(b % kSub);
    const double width = std::ldexp(1.0, e - 4);
    return std::ldexp(1.0, e) + (sub + 0.5) * width;
}

void LatencyHistogram::record(std::uint64_t ns) {
    ++counts_[bucket(ns)];
    ++count_;
}

void LatencyHistogram::merge(const LatencyHistogram& other) {
    for (std::size_t i = 0; i < kBuckets; ++i) counts_[i] += other.counts_[i];
    count_ += other.count_;
}

double LatencyHistogram::quantile_us(double q) const {
    if (count_ == 0) return 0;
    const auto rank = static_cast<std::uint64_t>(std::ceil(q * static_cast<double>(count_)));
    std::uint64_t seen = 0;
    for (std::size_t i = 0; i < kBuckets; ++i) {
        seen += counts_[i];
        if (seen >= std::max<std::uint64_t>(rank, 1)) return bucket_mid(i) / 1000.0;
    }
    return bucket_mid(kBuckets - 1) / 1000.0;
}

namespace {

LatencySummary summarize(const LatencyHistogram& h) {
    return {h.count(), h.quantile_us(0.50), h.quantile_us(0.95), h.quantile_us(0.99)};
}

struct ClientStats {
    std::array<LatencyHistogram, 4> hist;  // lookup, assign, increment, commit
    std::uint64_t ops = 0;
    std::uint64_t txns = 0;
    std::uint64_t aborts = 0;
    std::uint64_t old_reads = 0;
};

constexpr std::size_t kCommitHist = 3;

std::string fmt(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << v;
    return os.str();
}

}  // namespace

BenchReport run_workload(const BenchConfig& cfg) {
    if (cfg.spec.threads == 0) throw std::invalid_argument("bench: need at least one thread");
    auto store = make_store(cfg.store, cfg.dir, cfg.engine);
    TransactionManager tm(store, ManagerOptions{cfg.isolation, std::nullopt, nullptr});

    std::vector<ClientStats> stats(cfg.spec.threads);
    std::atomic<bool> stop{false};
    std::mutex err_mu;
    std::string error;

    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                                      std::chrono::duration<double>(cfg.spec.duration_sec));

    const auto client = [&](std::size_t t) {
        auto& st = stats[t];
        OpGenerator gen(cfg.spec, cfg.seed * 1'000'003ULL + t);
        std::vector<Op> ops(cfg.spec.ops_per_txn);
        std::size_t done = 0;
        try {
            while (!stop.load(std::memory_order_relaxed)) {
                if (cfg.spec.txn_count ? done >= *cfg.spec.txn_count : Clock::now() >= deadline) break;
                for (auto& op : ops) op = gen.next();
                std::optional<Timestamp> read_st;
                if (gen.next_is_old_read()) {
                    const auto snap = tm.generator().peekSnapshot().value;
                    const auto horizon = store->readHorizon().value;
                    // Strictly before the latest commit, which is snap - 1.
                    if (snap >= 2 && horizon < snap - 1) {
                        read_st = Timestamp{gen.uniform(horizon, snap - 1)};
                        ++st.old_reads;
                    }
                }
                for (;;) {
                    const auto id = tm.begin(read_st);
                    for (const auto& op : ops) {
                        const Key key(op.key);
                        const auto t0 = Clock::now();
                        switch (op.kind) {
                            case Op::Kind::Lookup:
                                (void)tm.read(id, key);
                                break;
                            case Op::Kind::Assign:
                                tm.update(id, key, Effect::assign(op.amount));
                                break;
                            case Op::Kind::Increment:
                                tm.update(id, key, Effect::incr(op.amount));
                                break;
                        }
                        st.hist[static_cast<std::size_t>(op.kind)].record(
                            static_cast<std::uint64_t>((Clock::now() - t0).count()));
                    }
                    const auto t0 = Clock::now();
                    const auto r = tm.commit(id);
                    st.hist[kCommitHist].record(static_cast<std::uint64_t>((Clock::now() - t0).count()));
                    if (r.ok()) break;
                    ++st.aborts;
                    // an old snapshot that lost a write conflict would lose it again
                    read_st.reset();
                }
                st.ops += ops.size();
                ++st.txns;
                ++done;
            }
        } catch (const std::exception& e) {
            std::lock_guard lock(err_mu);
            if (error.empty()) error = e.what();
            stop = true;
        }
    };

    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < cfg.spec.threads; ++t) threads.emplace_back(client, t);
    for (auto& th : threads) th.join();
    const double wall = std::chrono::duration<double>(Clock::now() - start).count();

    BenchReport rep;
    rep.workload = std::string(to_string(cfg.spec.kind));
    rep.store = std::string(to_string(cfg.store));
    rep.threads = cfg.spec.threads;
    rep.isolation = std::string(to_string(cfg.isolation));
    rep.wall_sec = wall;
    rep.error = error;

    std::array<LatencyHistogram, 4> hist;
    LatencyHistogram all;
    for (const auto& s : stats) {
        for (std::size_t i = 0; i < hist.size(); ++i) {
            hist[i].merge(s.hist[i]);
            all.merge(s.hist[i]);
        }
        rep.ops += s.ops;
        rep.txns += s.txns;
        rep.aborts += s.aborts;
        rep.old_reads += s.old_reads;
    }
    rep.overall = summarize(all);
    const char* names[] = {"lookup", "assign", "increment", "commit"};
    for (std::size_t i = 0; i < hist.size(); ++i) {
        if (hist[i].count() > 0) rep.per_op[names[i]] = summarize(hist[i]);
    }
    rep.throughput_ops_s = wall > 0 ? static_cast<double>(rep.ops) / wall : 0;
    if (auto* eng = dynamic_cast<CobbleEngine*>(store.get())) rep.probes = eng->probes();
    return rep;
}

std::string BenchReport::csv_header() {
    return "workload,store,threads,isolation,ops,aborts,p50_us,p95_us,p99_us,throughput_ops_s";
}

std::string BenchReport::csv_row() const {
    std::ostringstream os;
    os << workload << "," << store << "," << threads << "," << isolation << "," << ops << "," << aborts << ","
       << fmt(overall.p50_us) << "," << fmt(overall.p95_us) << "," << fmt(overall.p99_us) << ","
       << fmt(throughput_ops_s);
    return os.str();
}

std::string BenchReport::table() const {
    std::ostringstream os;
    os << "workload " << workload << "  store " << store << "  threads " << threads << "  isolation "
       << isolation << "\n";
    os << "ops " << ops << "  txns " << txns << "  aborts " << aborts << "  old_reads " << old_reads
       << "  wall " << fmt(wall_sec) << " s  throughput " << fmt(throughput_ops_s) << " ops/s\n";
    if (store == "cobble") os << "ministore probes " << probes << "\n";
    os << std::left << std::setw(10) << "op" << std::right << std::setw(12) << "count" << std::setw(12)
       << "p50_us" << std::setw(12) << "p95_us" << std::setw(12) << "p99_us" << "\n";
    const auto row = [&](const std::string& name, const LatencySummary& s) {
        os << std::left << std::setw(10) << name << std::right << std::setw(12) << s.count << std::setw(12)
           << fmt(s.p50_us) << std::setw(12) << fmt(s.p95_us) << std::setw(12) << fmt(s.p99_us) << "\n";
    };
    for (const auto& [name, s] : per_op) row(name, s);
    row("all", overall);
    if (!error.empty()) os << "error: " << error << "\n";
    return os.str();
}

}  // namespace cobble
