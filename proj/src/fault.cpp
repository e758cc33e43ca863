#include "cobble/fault.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <stdexcept>
#include <string>

#include "cobble/errors.hpp"

namespace cobble {

namespace {

struct PointName {
    FaultPoint point;
    std::string_view name;
};

constexpr PointName kPointNames[] = {
    {FaultPoint::BeforeFlush, "before-flush"},
    {FaultPoint::AfterFlushBeforeNotify, "after-flush-before-notify"},
    {FaultPoint::AfterWalWriteBeforeManifest, "after-wal-write-before-manifest"},
    {FaultPoint::DuringCheckpointSerialize, "during-checkpoint-serialize"},
    {FaultPoint::DuringRecoveryStep, "during-recovery-step"},
};

void corrupt_file(const std::filesystem::path& file, std::uint64_t offset, std::uint64_t len) {
    const int fd = ::open(file.c_str(), O_RDWR);
    if (fd < 0) return;
    for (std::uint64_t i = 0; i < len; ++i) {
        unsigned char b = 0;
        if (::pread(fd, &b, 1, static_cast<off_t>(offset + i)) != 1) break;
        b ^= 0xFF;
        if (::pwrite(fd, &b, 1, static_cast<off_t>(offset + i)) != 1) break;
    }
    ::close(fd);
}

}  // namespace

std::string_view to_string(FaultPoint p) {
    for (const auto& pn : kPointNames) {
        if (pn.point == p) return pn.name;
    }
    return "unknown";
}

FaultPoint parse_fault_point(std::string_view name) {
    for (const auto& pn : kPointNames) {
        if (pn.name == name) return pn.point;
    }
    throw std::invalid_argument("unknown fault point: " + std::string(name));
}

bool FaultInjector::compiled_in() noexcept {
#if defined(COBBLE_FAULT_INJECTION)
    return true;
#else
    return false;
#endif
}

void FaultInjector::arm(FaultTrigger trigger) {
    if (!compiled_in()) throw std::logic_error("fault injection is not compiled into this build");
    std::lock_guard lock(mu_);
    armed_ = std::move(trigger);
    fired_ = false;
    fired_path_.reset();
}

void FaultInjector::disarm() {
    std::lock_guard lock(mu_);
    armed_.reset();
}

bool FaultInjector::fired() const {
    std::lock_guard lock(mu_);
    return fired_;
}

std::optional<std::string> FaultInjector::fired_path() const {
    std::lock_guard lock(mu_);
    return fired_path_;
}

void FaultInjector::hit(FaultPoint point, const std::filesystem::path& file, int step) {
    FaultAction action;
    {
        std::lock_guard lock(mu_);
        if (!armed_ || armed_->point != point) return;
        if (point == FaultPoint::DuringRecoveryStep && armed_->recovery_step != step) return;
        if (!armed_->path_filter.empty() &&
            file.string().find(armed_->path_filter) == std::string::npos) {
            return;
        }
        if (armed_->skip > 0) {
            --armed_->skip;
            return;
        }
        action = armed_->action;
        armed_.reset();
        fired_ = true;
        fired_path_ = file.string();
    }

    std::string where(to_string(point));
    if (step >= 0) where += "[" + std::to_string(step) + "]";
    switch (action.kind) {
        case FaultAction::Kind::CrashProcess:
            throw SimulatedCrash(where);
        case FaultAction::Kind::FailFlush:
            throw IoError("injected I/O failure at " + where);
        case FaultAction::Kind::CorruptBytes:
            if (!file.empty()) corrupt_file(file, action.offset, action.length);
            throw SimulatedCrash(where);
        case FaultAction::Kind::TruncateAt:
            if (!file.empty()) {
                std::error_code ec;
                const auto size = std::filesystem::file_size(file, ec);
                if (!ec && action.offset < size) std::filesystem::resize_file(file, action.offset, ec);
            }
            throw SimulatedCrash(where);
    }
}

}  // namespace cobble
