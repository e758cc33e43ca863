#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cobble {

// Named places in the storage paths where a test can inject a failure.
enum class FaultPoint {
    BeforeFlush,                  // journal flush, before any byte reaches the file
    AfterFlushBeforeNotify,       // commit durable, generator not yet notified
    AfterWalWriteBeforeManifest,  // new store file written, MANIFEST not yet committed
    DuringCheckpointSerialize,    // checkpoint file half written
    DuringRecoveryStep,           // engine recovery step boundary k
};

std::string_view to_string(FaultPoint p);
// Accepts the names used on the command line ("before-flush", ...). Throws
// std::invalid_argument for an unknown name.
FaultPoint parse_fault_point(std::string_view name);

struct FaultAction {
    enum class Kind { CrashProcess, FailFlush, CorruptBytes, TruncateAt };
    Kind kind = Kind::CrashProcess;
    std::uint64_t offset = 0;
    std::uint64_t length = 0;

    static FaultAction crash() { return {Kind::CrashProcess, 0, 0}; }
    static FaultAction fail_flush() { return {Kind::FailFlush, 0, 0}; }
    static FaultAction corrupt(std::uint64_t off, std::uint64_t len) {
        return {Kind::CorruptBytes, off, len};
    }
    static FaultAction truncate_at(std::uint64_t off) { return {Kind::TruncateAt, off, 0}; }
};

// Thrown when an injected crash fires. The object graph that threw must be
// abandoned; only on-disk state survives. Deliberately not a cobble::Error.
class SimulatedCrash : public std::exception {
public:
    explicit SimulatedCrash(std::string where) : what_("simulated crash at " + std::move(where)) {}
    const char* what() const noexcept override { return what_.c_str(); }

private:
    std::string what_;
};

struct FaultTrigger {
    FaultPoint point = FaultPoint::BeforeFlush;
    FaultAction action;
    int recovery_step = -1;   // DuringRecoveryStep only
    std::string path_filter;  // fire only when the file path contains this
    int skip = 0;             // matching hits to let through before firing
};

// Fires a single armed trigger once. Thread-safe.
//
// CrashProcess throws SimulatedCrash. FailFlush throws IoError. CorruptBytes
// and TruncateAt mutate the file named at the hit site, then crash.
class FaultInjector {
public:
    void arm(FaultTrigger trigger);
    void disarm();

    void hit(FaultPoint point, const std::filesystem::path& file = {}, int step = -1);

    [[nodiscard]] bool fired() const;
    [[nodiscard]] std::optional<std::string> fired_path() const;

    [[nodiscard]] static bool compiled_in() noexcept;

private:
    mutable std::mutex mu_;
    std::optional<FaultTrigger> armed_;
    bool fired_ = false;
    std::optional<std::string> fired_path_;
};

#if defined(COBBLE_FAULT_INJECTION)
#define COBBLE_FAULT(injector, ...)                 \
    do {                                            \
        if (injector) (injector)->hit(__VA_ARGS__); \
    } while (0)
#else
#define COBBLE_FAULT(injector, ...) \
    do {                            \
        (void)(injector);           \
    } while (0)
#endif

}  // namespace cobble
