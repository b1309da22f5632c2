#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace phiscrub::utf8 {

struct InvalidUtf8 : std::runtime_error {
    std::size_t byte_pos;
    explicit InvalidUtf8(std::size_t pos)
        : std::runtime_error("invalid UTF-8 at byte " + std::to_string(pos)),
          byte_pos(pos) {}
};

/// Byte offset of each code point, plus a trailing entry equal to text.size().
/// cp_to_byte[i] is where code point i starts; size() - 1 is the code point count.
inline std::vector<std::size_t> index_map(const std::string& text) {
    std::vector<std::size_t> map;
    map.reserve(text.size() + 1);
    std::size_t i = 0;
    const auto n = text.size();
    while (i < n) {
        map.push_back(i);
        unsigned char c = static_cast<unsigned char>(text[i]);
        std::size_t len;
        if (c < 0x80) len = 1;
        else if ((c & 0xE0) == 0xC0) len = 2;
        else if ((c & 0xF0) == 0xE0) len = 3;
        else if ((c & 0xF8) == 0xF0) len = 4;
        else throw InvalidUtf8(i);
        if (i + len > n) throw InvalidUtf8(i);
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80)
                throw InvalidUtf8(i + k);
        }
        i += len;
    }
    map.push_back(n);
    return map;
}

inline std::size_t count(const std::string& text) {
    return index_map(text).size() - 1;
}

inline bool is_ascii(const std::string& text) {
    for (char c : text)
        if (static_cast<unsigned char>(c) >= 0x80) return false;
    return true;
}

/// Decodes UTF-8 into code points. Throws InvalidUtf8.
inline std::vector<char32_t> decode(const std::string& text) {
    std::vector<char32_t> out;
    out.reserve(text.size());
    std::size_t i = 0;
    const auto n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        char32_t cp;
        std::size_t len;
        if (c < 0x80) { cp = c; len = 1; }
        else if ((c & 0xE0) == 0xC0) { cp = c & 0x1F; len = 2; }
        else if ((c & 0xF0) == 0xE0) { cp = c & 0x0F; len = 3; }
        else if ((c & 0xF8) == 0xF0) { cp = c & 0x07; len = 4; }
        else throw InvalidUtf8(i);
        if (i + len > n) throw InvalidUtf8(i);
        for (std::size_t k = 1; k < len; ++k) {
            unsigned char cc = static_cast<unsigned char>(text[i + k]);
            if ((cc & 0xC0) != 0x80) throw InvalidUtf8(i + k);
            cp = (cp << 6) | (cc & 0x3F);
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append(out, cp);
    return out;
}

/// Substring by code-point offsets.
inline std::string slice(const std::string& text, const std::vector<std::size_t>& map,
                         std::size_t cp_start, std::size_t cp_end) {
    return text.substr(map[cp_start], map[cp_end] - map[cp_start]);
}

}  // namespace phiscrub::utf8
