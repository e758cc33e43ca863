#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace cobble {

class FaultInjector;

// Whole-file helpers with fsync of the file and its directory.
std::string read_file(const std::filesystem::path& path);
void write_file_durably(const std::filesystem::path& path, std::string_view bytes,
                        FaultInjector* faults = nullptr);
void sync_directory(const std::filesystem::path& dir);

}  // namespace cobble
