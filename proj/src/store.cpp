#include "cobble/store.hpp"

#include <ostream>

namespace cobble {

namespace {

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        for (std::size_t j = 1; j < len; ++j) {
            const auto cc = static_cast<unsigned char>(s[i + j]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // Reject overlong forms, surrogates and out-of-range code points.
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
            (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
            return false;
        }
        i += len;
    }
    return true;
}

}  // namespace

void validate_key_bytes(std::string_view bytes) {
    if (bytes.empty()) throw InvalidKey("key must not be empty");
    if (bytes.size() > kMaxKeyBytes) {
        throw InvalidKey("key exceeds " + std::to_string(kMaxKeyBytes) + " bytes");
    }
    if (bytes.find('\0') != std::string_view::npos) throw InvalidKey("key contains NUL");
    if (!valid_utf8(bytes)) throw InvalidKey("key is not valid UTF-8");
}

Key::Key(std::string bytes) : bytes_(std::move(bytes)) { validate_key_bytes(bytes_); }

std::ostream& operator<<(std::ostream& os, const Window& w) {
    os << "[" << w.lo << ", ";
    if (w.hi) {
        os << *w.hi;
    } else {
        os << "open";
    }
    return os << ")";
}

const TransactionDescriptor& detached_reader() {
    static const TransactionDescriptor reader{"<reader>", Timestamp{0}, std::nullopt, std::nullopt, {}, {}, {}};
    return reader;
}

}  // namespace cobble
