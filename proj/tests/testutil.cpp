#include "testutil.hpp"

#include <atomic>
#include <unistd.h>

namespace cobble::test {

ScratchDir::ScratchDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("cobble-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

ScratchDir::~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

TransactionDescriptor descriptor(const std::string& id, std::uint64_t st) {
    TransactionDescriptor d;
    d.txn_id = id;
    d.st = Timestamp{st};
    return d;
}

TransactionDescriptor run_txn(Store& s, const std::string& id, std::uint64_t st, std::uint64_t ct,
                              const Writes& writes) {
    auto d = descriptor(id, st);
    s.doBegin(d);
    for (const auto& [k, e] : writes) {
        auto [it, fresh] = d.effect_buffer.try_emplace(k, e);
        if (!fresh) it->second = apply(it->second, e);
        s.doUpdate(d, k, e);
    }
    d.ct = Timestamp{ct};
    s.doCommit(d);
    return d;
}

std::optional<Effect> look(const Store& s, const Key& k, std::uint64_t read_st) {
    return s.lookup(detached_reader(), k, Timestamp{read_st});
}

Effect random_effect(std::mt19937_64& rng, int span) {
    std::uniform_int_distribution<int> coin(0, 2);
    std::uniform_int_distribution<std::int64_t> v(-span, span);
    switch (coin(rng)) {
        case 0:
            return Effect::assign(v(rng));
        case 1:
            return Effect::incr(v(rng));
        default:
            return Effect{v(rng), v(rng)};
    }
}

}  // namespace cobble::test
