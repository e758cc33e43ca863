#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cobble/effect.hpp"
#include "cobble/store.hpp"

namespace cobble::test {

// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag = "t");
    ~ScratchDir();
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

using Writes = std::vector<std::pair<Key, Effect>>;

TransactionDescriptor descriptor(const std::string& id, std::uint64_t st);

// Begin, update each write, commit at ct. Returns the descriptor used.
TransactionDescriptor run_txn(Store& s, const std::string& id, std::uint64_t st, std::uint64_t ct,
                              const Writes& writes);

std::optional<Effect> look(const Store& s, const Key& k, std::uint64_t read_st);

Effect random_effect(std::mt19937_64& rng, int span = 5);

}  // namespace cobble::test
