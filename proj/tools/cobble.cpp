// cobble: benchmark driver, line-protocol server, equivalence check and
// offline recovery for the stores in this repository.

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "cobble/bench.hpp"
#include "cobble/engine.hpp"
#include "cobble/equivalence.hpp"
#include "cobble/line_server.hpp"
#include "cobble/persistent_journal.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

template <typename F>
CLI::Validator choice_of(F parse, const std::string& what) {
    return CLI::Validator(
        [parse](std::string& s) -> std::string {
            try {
                (void)parse(s);
                return {};
            } catch (const std::invalid_argument& e) {
                return e.what();
            }
        },
        what);
}

int run_bench(const std::string& store, const std::string& workload, std::size_t threads, double seconds,
              std::uint64_t seed, const std::string& isolation, const std::string& out, const std::string& dir,
              std::size_t keys) {
    cobble::BenchConfig cfg;
    cfg.store = cobble::parse_store(store);
    cfg.spec.kind = cobble::parse_workload(workload);
    cfg.spec.threads = threads;
    cfg.spec.duration_sec = seconds;
    cfg.spec.key_space = keys;
    cfg.isolation = cobble::parse_isolation(isolation);
    cfg.seed = seed;
    cfg.dir = dir;
    const auto rep = cobble::run_workload(cfg);
    std::cout << rep.table();
    if (!out.empty()) {
        std::ofstream f(out);
        f << cobble::BenchReport::csv_header() << "\n" << rep.csv_row() << "\n";
        if (!f) {
            std::cerr << "cannot write " << out << "\n";
            return 1;
        }
    } else {
        std::cout << cobble::BenchReport::csv_header() << "\n" << rep.csv_row() << "\n";
    }
    return rep.error.empty() ? 0 : 1;
}

int run_serve(const std::string& addr, const std::string& dir, const std::string& isolation) {
    const auto [host, port] = cobble::parse_addr(addr);
    auto engine = cobble::CobbleEngine::open(dir);
    cobble::TransactionManager tm(engine, {cobble::parse_isolation(isolation), engine->recovered_floor(), nullptr});
    cobble::LineServer server(tm);
    const auto bound = server.start(host, port);
    std::cerr << "serving " << dir << " on " << host << ":" << bound << " (" << isolation << ")\n";
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    return 0;
}

int run_verify(std::size_t seeds, std::uint64_t first, const std::string& scratch) {
    cobble::EquivalenceReport total;
    for (std::uint64_t s = first; s < first + seeds; ++s) {
        const auto rep = cobble::verify_seed(s, {}, scratch);
        if (!rep.ok()) {
            std::cout << "seed " << s << ": " << rep.mismatches << " mismatches\n";
            for (const auto& f : rep.failures) std::cout << "  " << f << "\n";
        }
        total.merge(rep);
    }
    std::cout << (total.ok() ? "ok" : "FAILED") << ": " << seeds << " seeds, " << total.checks << " lookups, "
              << total.mismatches << " mismatches\n";
    return total.ok() ? 0 : 1;
}

int run_recover(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::is_regular_file(path)) {
        auto j = cobble::PersistentJournal::recover(path);
        std::cout << "persistent journal " << path << "\n";
        std::cout << "keys " << j->writtenKeys().size() << "\n";
        return 0;
    }
    if (!fs::exists(fs::path(path) / cobble::Manifest::kFileName)) {
        std::cerr << "no engine found in " << path << "\n";
        return 1;
    }
    auto e = cobble::CobbleEngine::open(path);
    std::cout << e->describe();
    if (const auto f = e->recovered_floor()) std::cout << "recovered floor " << f->value << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cobble"};
    app.require_subcommand(1);

    std::string store = "cobble", workload = "txn", isolation = "tcc", out, dir = "bench-data";
    std::size_t threads = 1, keys = 10'000;
    double seconds = 10;
    std::uint64_t seed = 1;
    auto* bench = app.add_subcommand("bench", "run a workload against a fresh store");
    bench->add_option("--store", store)->check(choice_of(cobble::parse_store, "map|journal|pjournal|cobble"));
    bench->add_option("--workload", workload)
        ->check(choice_of(cobble::parse_workload, "txn|old_reads|txn_increments"));
    bench->add_option("--threads", threads)->check(CLI::PositiveNumber);
    bench->add_option("--seconds", seconds)->check(CLI::PositiveNumber);
    bench->add_option("--seed", seed);
    bench->add_option("--isolation", isolation)->check(choice_of(cobble::parse_isolation, "tcc|si"));
    bench->add_option("--out", out, "CSV report path");
    bench->add_option("--dir", dir, "data directory for persistent stores (wiped)");
    bench->add_option("--keys", keys, "key space")->check(CLI::PositiveNumber);

    std::string addr = "127.0.0.1:7070", data = "cobble-data", serve_iso = "tcc";
    auto* serve = app.add_subcommand("serve", "serve the line protocol over TCP");
    serve->add_option("--addr", addr);
    serve->add_option("--dir", data);
    serve->add_option("--isolation", serve_iso)->check(choice_of(cobble::parse_isolation, "tcc|si"));

    std::size_t seeds = 100;
    std::uint64_t first_seed = 1;
    std::string scratch = "verify-scratch";
    auto* verify = app.add_subcommand("verify", "check every store against the oracle");
    verify->add_option("--seeds", seeds)->check(CLI::PositiveNumber);
    verify->add_option("--first-seed", first_seed);
    verify->add_option("--scratch", scratch);

    std::string rdir;
    auto* recover = app.add_subcommand("recover", "recover a data directory offline and print its layout");
    recover->add_option("--dir", rdir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 2;
    }

    try {
        if (bench->parsed()) return run_bench(store, workload, threads, seconds, seed, isolation, out, dir, keys);
        if (serve->parsed()) return run_serve(addr, data, serve_iso);
        if (verify->parsed()) return run_verify(seeds, first_seed, scratch);
        if (recover->parsed()) return run_recover(rdir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
