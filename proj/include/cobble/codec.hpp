#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cobble/journal_record.hpp"

// Binary encodings. All integers are little-endian.
//
//   Effect      : tag u8 (0 = no base, 1 = base) [base i64] delta i64
//   Record      : kind u8, txn_id (u16 len + bytes), ts u64, then
//                   Update   -> key (u16 len + bytes), Effect
//                   Manifest -> action u8, level+1 u8, path (u16 len + bytes),
//                               window.lo u64, window.hi u64 (max = open),
//                               has_range u8 [lo (u16 len + bytes), hi (u16 len + bytes)]
//   Frame       : "CBLE", payload length u32, payload, crc32(payload) u32
//   Map file    : "CBLMAP01", entry count u32, entries sorted by key bytes:
//                   key (u16 len + bytes), window.lo u64, window.hi u64,
//                   version count u32, versions (ct u64, st u64, Effect)
//                 then crc32 u32 over everything after the magic.
namespace cobble::codec {

inline constexpr char kFrameMagic[4] = {'C', 'B', 'L', 'E'};
inline constexpr std::size_t kFrameOverhead = 12;
inline constexpr std::string_view kMapMagic = "CBLMAP01";

std::uint32_t crc32(std::span<const std::uint8_t> bytes);
std::uint32_t crc32(std::string_view bytes);

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void str16(std::string_view s);  // u16 length prefix
    void raw(std::string_view s) { buf_.append(s); }

    [[nodiscard]] const std::string& bytes() const noexcept { return buf_; }
    [[nodiscard]] std::string take() noexcept { return std::move(buf_); }

private:
    std::string buf_;
};

// Bounds-checked reader; throws IntegrityError on underrun.
class Reader {
public:
    explicit Reader(std::string_view bytes) : data_(bytes) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    std::string str16();
    std::string_view raw(std::size_t n);

    [[nodiscard]] std::size_t remaining() const noexcept { return data_.size() - pos_; }
    [[nodiscard]] std::size_t position() const noexcept { return pos_; }

private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

void put_effect(Writer& w, const Effect& e);
Effect get_effect(Reader& r);

std::string encode_record(const JournalRecord& rec);
JournalRecord decode_record(std::string_view payload);

std::string encode_frame(std::string_view payload);

struct ScannedFrame {
    std::size_t offset;  // start of the frame in the buffer
    std::string_view payload;
};

struct ScanResult {
    std::vector<ScannedFrame> frames;
    std::size_t valid_end = 0;  // first byte after the last valid frame
};

// Scans from offset 0 and stops at the first frame that is truncated, has a
// bad magic or fails its checksum.
ScanResult scan_frames(std::string_view bytes);

struct MapFileVersion {
    Timestamp ct;
    Timestamp st;
    Effect effect;
    friend bool operator==(const MapFileVersion&, const MapFileVersion&) = default;
};

struct MapFileEntry {
    std::string key;
    Window window;
    std::vector<MapFileVersion> versions;
    friend bool operator==(const MapFileEntry&, const MapFileEntry&) = default;
};

// Entries are sorted by key bytes on encode.
std::string encode_map_file(std::vector<MapFileEntry> entries);
std::vector<MapFileEntry> decode_map_file(std::string_view bytes);

std::uint64_t encode_window_hi(const Window& w);
std::optional<Timestamp> decode_window_hi(std::uint64_t raw);

}  // namespace cobble::codec
