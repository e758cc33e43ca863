#include "cobble/file_util.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cobble/errors.hpp"
#include "cobble/fault.hpp"

namespace cobble {

namespace {

[[noreturn]] void throw_errno(const std::string& what, const std::filesystem::path& p) {
    throw IoError(what + " " + p.string() + ": " + std::strerror(errno));
}

void write_all(int fd, const char* data, std::size_t n, const std::filesystem::path& p) {
    while (n > 0) {
        const auto w = ::write(fd, data, n);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw_errno("write", p);
        }
        data += w;
        n -= static_cast<std::size_t>(w);
    }
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_file_durably(const std::filesystem::path& path, std::string_view bytes,
                        FaultInjector* faults) {
    const int fd = ::open(path.c_str(), O_CREAT | O_WRONLY | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw_errno("open", path);
    try {
        const auto half = bytes.size() / 2;
        write_all(fd, bytes.data(), half, path);
        COBBLE_FAULT(faults, FaultPoint::DuringCheckpointSerialize, path);
        write_all(fd, bytes.data() + half, bytes.size() - half, path);
        if (::fdatasync(fd) != 0) throw_errno("fdatasync", path);
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
    sync_directory(path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

void sync_directory(const std::filesystem::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

}  // namespace cobble
