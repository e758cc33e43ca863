#include "cobble/codec.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <limits>

#include "cobble/errors.hpp"

namespace cobble::codec {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks for large buffers.
    std::size_t off = 0;
    while (off < bytes.size()) {
        const auto n = static_cast<uInt>(
            std::min<std::size_t>(bytes.size() - off, std::numeric_limits<uInt>::max()));
        crc = ::crc32(crc, bytes.data() + off, n);
        off += n;
    }
    return static_cast<std::uint32_t>(crc);
}

std::uint32_t crc32(std::string_view bytes) {
    return crc32(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

void Writer::u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v));
    u8(static_cast<std::uint8_t>(v >> 8));
}

void Writer::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::str16(std::string_view s) {
    if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw IntegrityError("string too long for u16 length prefix");
    }
    u16(static_cast<std::uint16_t>(s.size()));
    raw(s);
}

std::string_view Reader::raw(std::size_t n) {
    if (remaining() < n) throw IntegrityError("truncated encoding");
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t Reader::u8() { return static_cast<std::uint8_t>(raw(1)[0]); }

std::uint16_t Reader::u16() {
    auto b = raw(2);
    return static_cast<std::uint16_t>(static_cast<std::uint8_t>(b[0]) |
                                      (static_cast<std::uint8_t>(b[1]) << 8));
}

std::uint32_t Reader::u32() {
    auto b = raw(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(b[i]);
    return v;
}

std::uint64_t Reader::u64() {
    auto b = raw(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(b[i]);
    return v;
}

std::string Reader::str16() {
    const auto n = u16();
    return std::string(raw(n));
}

void put_effect(Writer& w, const Effect& e) {
    if (e.base) {
        w.u8(0x01);
        w.i64(*e.base);
    } else {
        w.u8(0x00);
    }
    w.i64(e.delta);
}

Effect get_effect(Reader& r) {
    Effect e;
    const auto tag = r.u8();
    if (tag == 0x01) {
        e.base = r.i64();
    } else if (tag != 0x00) {
        throw IntegrityError("bad effect tag");
    }
    e.delta = r.i64();
    return e;
}

std::uint64_t encode_window_hi(const Window& w) {
    return w.hi ? w.hi->value : std::numeric_limits<std::uint64_t>::max();
}

std::optional<Timestamp> decode_window_hi(std::uint64_t raw) {
    if (raw == std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
    return Timestamp{raw};
}

std::string encode_record(const JournalRecord& rec) {
    Writer w;
    w.u8(static_cast<std::uint8_t>(rec.kind));
    w.str16(rec.txn_id);
    w.u64(rec.ts.value);
    if (rec.kind == RecordKind::Update) {
        w.str16(rec.key.value().str());
        put_effect(w, rec.effect.value());
    } else if (rec.kind == RecordKind::Manifest) {
        const auto& m = rec.manifest.value();
        w.u8(static_cast<std::uint8_t>(m.action));
        w.u8(static_cast<std::uint8_t>(m.level + 1));
        w.str16(m.path);
        w.u64(m.window.lo.value);
        w.u64(encode_window_hi(m.window));
        w.u8(m.key_range ? 1 : 0);
        if (m.key_range) {
            w.str16(m.key_range->lo);
            w.str16(m.key_range->hi);
        }
    }
    return w.take();
}

JournalRecord decode_record(std::string_view payload) {
    Reader r(payload);
    JournalRecord rec;
    const auto kind = r.u8();
    if (kind > static_cast<std::uint8_t>(RecordKind::Manifest)) {
        throw IntegrityError("unknown record kind");
    }
    rec.kind = static_cast<RecordKind>(kind);
    rec.txn_id = r.str16();
    rec.ts = Timestamp{r.u64()};
    if (rec.kind == RecordKind::Update) {
        auto k = r.str16();
        try {
            rec.key = Key(std::move(k));
        } catch (const InvalidKey& e) {
            throw IntegrityError(std::string("bad key in record: ") + e.what());
        }
        rec.effect = get_effect(r);
    } else if (rec.kind == RecordKind::Manifest) {
        ManifestEntry m;
        const auto action = r.u8();
        if (action > 1) throw IntegrityError("bad manifest action");
        m.action = static_cast<ManifestAction>(action);
        m.level = static_cast<int>(r.u8()) - 1;
        m.path = r.str16();
        m.window.lo = Timestamp{r.u64()};
        m.window.hi = decode_window_hi(r.u64());
        const auto has_range = r.u8();
        if (has_range > 1) throw IntegrityError("bad key-range flag");
        if (has_range) {
            KeyRange kr;
            kr.lo = r.str16();
            kr.hi = r.str16();
            m.key_range = std::move(kr);
        }
        rec.manifest = std::move(m);
    }
    if (r.remaining() != 0) throw IntegrityError("trailing bytes in record payload");
    return rec;
}

std::string encode_frame(std::string_view payload) {
    if (payload.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw IntegrityError("record payload too large");
    }
    Writer w;
    w.raw(std::string_view(kFrameMagic, 4));
    w.u32(static_cast<std::uint32_t>(payload.size()));
    w.raw(payload);
    w.u32(crc32(payload));
    return w.take();
}

ScanResult scan_frames(std::string_view bytes) {
    ScanResult out;
    std::size_t off = 0;
    while (bytes.size() - off >= kFrameOverhead) {
        if (std::memcmp(bytes.data() + off, kFrameMagic, 4) != 0) break;
        Reader r(bytes.substr(off + 4, 4));
        const std::size_t len = r.u32();
        if (bytes.size() - off - kFrameOverhead < len) break;
        const auto payload = bytes.substr(off + 8, len);
        Reader cr(bytes.substr(off + 8 + len, 4));
        if (cr.u32() != crc32(payload)) break;
        out.frames.push_back({off, payload});
        off += kFrameOverhead + len;
    }
    out.valid_end = off;
    return out;
}

std::string encode_map_file(std::vector<MapFileEntry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const MapFileEntry& a, const MapFileEntry& b) { return a.key < b.key; });
    Writer body;
    body.u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
        body.str16(e.key);
        body.u64(e.window.lo.value);
        body.u64(encode_window_hi(e.window));
        body.u32(static_cast<std::uint32_t>(e.versions.size()));
        for (const auto& v : e.versions) {
            body.u64(v.ct.value);
            body.u64(v.st.value);
            put_effect(body, v.effect);
        }
    }
    Writer out;
    out.raw(kMapMagic);
    out.raw(body.bytes());
    out.u32(crc32(body.bytes()));
    return out.take();
}

std::vector<MapFileEntry> decode_map_file(std::string_view bytes) {
    if (bytes.size() < kMapMagic.size() + 8 || bytes.substr(0, kMapMagic.size()) != kMapMagic) {
        throw IntegrityError("map file: bad magic or too short");
    }
    const auto body = bytes.substr(kMapMagic.size(), bytes.size() - kMapMagic.size() - 4);
    Reader tail(bytes.substr(bytes.size() - 4));
    if (tail.u32() != crc32(body)) throw IntegrityError("map file: checksum mismatch");

    Reader r(body);
    std::vector<MapFileEntry> out(r.u32());
    for (auto& e : out) {
        e.key = r.str16();
        e.window.lo = Timestamp{r.u64()};
        e.window.hi = decode_window_hi(r.u64());
        e.versions.resize(r.u32());
        for (auto& v : e.versions) {
            v.ct = Timestamp{r.u64()};
            v.st = Timestamp{r.u64()};
            v.effect = get_effect(r);
        }
    }
    if (r.remaining() != 0) throw IntegrityError("map file: trailing bytes");
    return out;
}

}  // namespace cobble::codec
