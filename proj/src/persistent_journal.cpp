#include "cobble/persistent_journal.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "cobble/codec.hpp"
#include "cobble/fault.hpp"
#include "cobble/file_util.hpp"

namespace cobble {

namespace {

int open_for_append(const std::filesystem::path& path, bool truncate) {
    int flags = O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC;
    if (truncate) flags |= O_TRUNC;
    const int fd = ::open(path.c_str(), flags, 0644);
    if (fd < 0) {
        throw IoError("pjournal: open " + path.string() + ": " + std::strerror(errno));
    }
    return fd;
}

}  // namespace

PersistentJournal::PersistentJournal(std::filesystem::path path, int fd, Window window,
                                     FaultInjector* faults)
    : path_(std::move(path)), faults_(faults), fd_(fd), mem_(window) {}

PersistentJournal::~PersistentJournal() {
    if (fd_ >= 0) ::close(fd_);
}

std::shared_ptr<PersistentJournal> PersistentJournal::create(const std::filesystem::path& path,
                                                             Window window, FaultInjector* faults) {
    const int fd = open_for_append(path, /*truncate=*/true);
    if (::fdatasync(fd) != 0) {
        ::close(fd);
        throw IoError("pjournal: fdatasync " + path.string());
    }
    sync_directory(path.parent_path().empty() ? "." : path.parent_path());
    return std::shared_ptr<PersistentJournal>(new PersistentJournal(path, fd, window, faults));
}

std::shared_ptr<PersistentJournal> PersistentJournal::recover(const std::filesystem::path& path,
                                                              Window window, FaultInjector* faults) {
    if (!std::filesystem::exists(path)) throw IoError("pjournal: no such file " + path.string());
    const auto bytes = read_file(path);
    const auto scan = codec::scan_frames(bytes);

    JournalStore scratch(window);
    std::size_t valid_end = scan.valid_end;
    std::vector<JournalRecord> recs;
    recs.reserve(scan.frames.size());
    for (const auto& f : scan.frames) {
        try {
            auto rec = codec::decode_record(f.payload);
            scratch.check_append(rec);
            scratch.append(rec);
            recs.push_back(std::move(rec));
        } catch (const Error&) {
            valid_end = f.offset;
            break;
        }
    }

    if (valid_end < bytes.size()) {
        std::error_code ec;
        std::filesystem::resize_file(path, valid_end, ec);
        if (ec) throw IoError("pjournal: truncate " + path.string() + ": " + ec.message());
    }

    const int fd = open_for_append(path, /*truncate=*/false);
    if (::fdatasync(fd) != 0) {
        ::close(fd);
        throw IoError("pjournal: fdatasync " + path.string());
    }
    std::shared_ptr<PersistentJournal> out(new PersistentJournal(path, fd, window, faults));
    out->durable_size_ = valid_end;
    for (const auto& rec : recs) out->mem_.append(rec);

    std::vector<JournalRecord> aborts;
    for (const auto& id : out->mem_.unterminated()) aborts.push_back(JournalRecord::abort(id));
    if (!aborts.empty()) out->appendAndFlush(aborts);
    return out;
}

void PersistentJournal::check_usable() const {
    if (failed_) throw IoError("pjournal: " + path_.string() + " failed earlier");
    if (fd_ < 0) throw IoError("pjournal: " + path_.string() + " is closed");
}

void PersistentJournal::appendRecord(const JournalRecord& rec) {
    std::lock_guard lock(io_mu_);
    check_usable();
    mem_.check_append(rec);
    pending_ += codec::encode_frame(codec::encode_record(rec));
    mem_.append(rec);
}

void PersistentJournal::appendAndFlush(const std::vector<JournalRecord>& recs) {
    if (recs.empty()) return;
    std::unique_lock lock(io_mu_);
    check_usable();
    mem_.check_append(recs.front());
    for (const auto& rec : recs) pending_ += codec::encode_frame(codec::encode_record(rec));
    flush_until(lock, durable_size_ + in_flight_ + pending_.size());
    for (const auto& rec : recs) mem_.append(rec);
}

void PersistentJournal::flush() {
    std::unique_lock lock(io_mu_);
    check_usable();
    flush_until(lock, durable_size_ + in_flight_ + pending_.size());
}

// Group commit: the first caller to find no flush running writes everything
// buffered so far, including frames of callers that queued behind it.
void PersistentJournal::flush_until(std::unique_lock<std::mutex>& lock, std::uint64_t target) {
    while (durable_size_ < target) {
        if (failed_) throw IoError("pjournal: " + path_.string() + " failed during group flush");
        if (in_flight_ > 0) {
            flushed_.wait(lock);
            continue;
        }
        std::string batch;
        batch.swap(pending_);
        in_flight_ = batch.size();
        lock.unlock();
        try {
            write_batch(batch);
        } catch (...) {
            lock.lock();
            failed_ = true;
            in_flight_ = 0;
            pending_.clear();
            flushed_.notify_all();
            throw;
        }
        lock.lock();
        durable_size_ += batch.size();
        in_flight_ = 0;
        flushed_.notify_all();
    }
}

void PersistentJournal::write_batch(const std::string& batch) {
    COBBLE_FAULT(faults_, FaultPoint::BeforeFlush, path_);
    const char* data = batch.data();
    std::size_t n = batch.size();
    while (n > 0) {
        const auto w = ::write(fd_, data, n);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw IoError("pjournal: write " + path_.string() + ": " + std::strerror(errno));
        }
        data += w;
        n -= static_cast<std::size_t>(w);
    }
    if (::fdatasync(fd_) != 0) {
        throw IoError("pjournal: fdatasync " + path_.string() + ": " + std::strerror(errno));
    }
}

void PersistentJournal::close() {
    std::unique_lock lock(io_mu_);
    if (fd_ < 0) return;
    if (!failed_) flush_until(lock, durable_size_ + in_flight_ + pending_.size());
    ::close(fd_);
    fd_ = -1;
}

void PersistentJournal::doBegin(const TransactionDescriptor& txn) {
    appendRecord(JournalRecord::begin(txn.txn_id, txn.st));
}

std::optional<Effect> PersistentJournal::lookup(const TransactionDescriptor& txn, const Key& key,
                                                Timestamp read_st) const {
    return mem_.lookup(txn, key, read_st);
}

void PersistentJournal::doUpdate(const TransactionDescriptor& txn, const Key& key, const Effect& eff) {
    appendRecord(JournalRecord::update(txn.txn_id, key, eff));
}

void PersistentJournal::doAbort(const TransactionDescriptor& txn) {
    appendRecord(JournalRecord::abort(txn.txn_id));
}

void PersistentJournal::doCommit(const TransactionDescriptor& txn) {
    if (!txn.ct) throw TxnStateError("pjournal: commit without a commit timestamp");
    // A read-only commit has nothing to make durable; it rides the next flush.
    if (txn.effect_buffer.empty()) {
        appendRecord(JournalRecord::commit(txn.txn_id, *txn.ct));
        return;
    }
    appendAndFlush({JournalRecord::commit(txn.txn_id, *txn.ct)});
}

void PersistentJournal::persist(const std::filesystem::path& path) const {
    std::uint64_t size = 0;
    {
        std::lock_guard lock(io_mu_);
        size = durable_size_;
    }
    auto bytes = read_file(path_);
    bytes.resize(std::min<std::uint64_t>(bytes.size(), size));
    write_file_durably(path, bytes);
}

std::uint64_t PersistentJournal::durableSize() const {
    std::lock_guard lock(io_mu_);
    return durable_size_;
}

bool PersistentJournal::failed() const {
    std::lock_guard lock(io_mu_);
    return failed_;
}

}  // namespace cobble
