#ifndef ARMORPARSE_TEXT_HPP
#define ARMORPARSE_TEXT_HPP

#include <cstdint>
#include <string>
#include <string_view>

#include "diagnostics.hpp"

namespace armorparse {

inline constexpr char32_t kMaxScalar = 0x10FFFF;

inline bool is_scalar(char32_t cp) {
    return cp <= kMaxScalar && !(cp >= 0xD800 && cp <= 0xDFFF);
}

// Decodes the UTF-8 sequence starting at pos. On success returns the scalar
// and advances pos past it; on malformed input returns U+FFFFFFFF and leaves
// pos unchanged. Strict: overlong forms, surrogates and truncation all fail.
inline char32_t utf8_decode(std::string_view s, std::size_t& pos) {
    constexpr char32_t bad = 0xFFFFFFFF;
    if (pos >= s.size()) return bad;
    auto byte = [&](std::size_t i) -> std::uint8_t {
        return static_cast<std::uint8_t>(s[i]);
    };
    std::uint8_t b0 = byte(pos);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    auto cont = [&](std::size_t i) {
        return i < s.size() && (byte(i) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0) {
        if (!cont(pos + 1)) return bad;
        char32_t cp = ((b0 & 0x1Fu) << 6) | (byte(pos + 1) & 0x3Fu);
        if (cp < 0x80) return bad;
        pos += 2;
        return cp;
    }
    if ((b0 & 0xF0) == 0xE0) {
        if (!cont(pos + 1) || !cont(pos + 2)) return bad;
        char32_t cp = ((b0 & 0x0Fu) << 12) | ((byte(pos + 1) & 0x3Fu) << 6) |
                      (byte(pos + 2) & 0x3Fu);
        if (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) return bad;
        pos += 3;
        return cp;
    }
    if ((b0 & 0xF8) == 0xF0) {
        if (!cont(pos + 1) || !cont(pos + 2) || !cont(pos + 3)) return bad;
        char32_t cp = ((b0 & 0x07u) << 18) | ((byte(pos + 1) & 0x3Fu) << 12) |
                      ((byte(pos + 2) & 0x3Fu) << 6) | (byte(pos + 3) & 0x3Fu);
        if (cp < 0x10000 || cp > kMaxScalar) return bad;
        pos += 4;
        return cp;
    }
    return bad;
}

inline void utf8_append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

inline std::string utf8_encode(char32_t cp) {
    std::string s;
    utf8_append(s, cp);
    return s;
}

inline bool utf8_valid(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        if (utf8_decode(s, pos) == 0xFFFFFFFF) return false;
    }
    return true;
}

struct LineCol {
    int line = 1;
    int col = 1;
};

inline LineCol line_col_at(std::string_view text, std::size_t offset) {
    LineCol lc;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++lc.line;
            lc.col = 1;
        } else {
            ++lc.col;
        }
    }
    return lc;
}

// Renders a string for diagnostics: control and non-ASCII characters become
// \u{...}, backslash doubles, the rest passes through.
inline std::string display(std::string_view s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t start = pos;
        char32_t cp = utf8_decode(s, pos);
        if (cp == 0xFFFFFFFF) {
            out += "\\x";
            out += hex[static_cast<std::uint8_t>(s[start]) >> 4];
            out += hex[static_cast<std::uint8_t>(s[start]) & 0xF];
            ++pos;
            continue;
        }
        if (cp == U'\\') {
            out += "\\\\";
        } else if (cp == U'\n') {
            out += "\\n";
        } else if (cp == U'\r') {
            out += "\\r";
        } else if (cp == U'\t') {
            out += "\\t";
        } else if (cp < 0x20 || cp == 0x7F || cp > 0x7E) {
            out += "\\u{";
            bool started = false;
            for (int shift = 20; shift >= 0; shift -= 4) {
                unsigned nib = (cp >> shift) & 0xF;
                if (nib != 0 || started || shift == 0) {
                    out += hex[nib];
                    started = true;
                }
            }
            out += '}';
        } else {
            out += static_cast<char>(cp);
        }
    }
    return out;
}

// Unescapes a payload line: `\\` is a literal backslash, `\uHHHH` a code
// unit (surrogate pairs combine into one scalar), any other backslash stays
// literal. A lone high surrogate or an unpaired low surrogate is an error.
inline Result<std::string> unescape_payload(std::string_view s) {
    auto hex4 = [&](std::size_t i, std::uint32_t& out) {
        if (i + 4 > s.size()) return false;
        std::uint32_t v = 0;
        for (std::size_t k = i; k < i + 4; ++k) {
            char c = s[k];
            v <<= 4;
            if (c >= '0' && c <= '9')
                v |= static_cast<std::uint32_t>(c - '0');
            else if (c >= 'a' && c <= 'f')
                v |= static_cast<std::uint32_t>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F')
                v |= static_cast<std::uint32_t>(c - 'A' + 10);
            else
                return false;
        }
        out = v;
        return true;
    };
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '\\') {
            out += s[i++];
            continue;
        }
        if (i + 1 < s.size() && s[i + 1] == '\\') {
            out += '\\';
            i += 2;
            continue;
        }
        std::uint32_t unit = 0;
        if (i + 1 < s.size() && s[i + 1] == 'u' && hex4(i + 2, unit)) {
            i += 6;
            if (unit >= 0xD800 && unit <= 0xDBFF) {
                std::uint32_t low = 0;
                if (i + 1 < s.size() && s[i] == '\\' && s[i + 1] == 'u' &&
                    hex4(i + 2, low) && low >= 0xDC00 && low <= 0xDFFF) {
                    i += 6;
                    char32_t cp = 0x10000 + ((unit - 0xD800) << 10) +
                                  (low - 0xDC00);
                    utf8_append(out, cp);
                    continue;
                }
                return Result<std::string>::fail(
                    "payload-surrogate",
                    "high surrogate \\u escape without a following low "
                    "surrogate");
            }
            if (unit >= 0xDC00 && unit <= 0xDFFF) {
                return Result<std::string>::fail(
                    "payload-surrogate", "unpaired low surrogate \\u escape");
            }
            utf8_append(out, static_cast<char32_t>(unit));
            continue;
        }
        out += '\\';
        ++i;
    }
    return out;
}

} // namespace armorparse

#endif
