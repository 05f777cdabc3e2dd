#ifndef ARMORPARSE_CODEC_HPP
#define ARMORPARSE_CODEC_HPP

#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "diagnostics.hpp"
#include "grammar.hpp"
#include "text.hpp"

namespace armorparse {

// Replaces every control character with its escape. Characters without a
// rule pass through untouched.
inline std::string encode(std::string_view text, const EncodeTable& table) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t start = pos;
        char32_t cp = utf8_decode(text, pos);
        if (cp == 0xFFFFFFFF) { // invalid byte: copy through
            out += text[start];
            pos = start + 1;
            continue;
        }
        std::string_view raw = text.substr(start, pos - start);
        const EncodeRule* hit = nullptr;
        for (const auto& r : table.rules) {
            if (r.control == raw) {
                hit = &r;
                break;
            }
        }
        if (hit)
            out += hit->escape;
        else
            out += raw;
    }
    return out;
}

// Strict inverse of encode. Every escape turns back into its control; a
// character that starts some escape without completing one is an error, and
// so is a bare control character in supposedly encoded text.
inline Result<std::string> decode(std::string_view text,
                                  const EncodeTable& table) {
    using R = Result<std::string>;
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const EncodeRule* best = nullptr;
        for (const auto& r : table.rules) {
            if (r.escape.size() > (best ? best->escape.size() : 0) &&
                text.substr(pos, r.escape.size()) == r.escape) {
                best = &r;
            }
        }
        if (best) {
            out += best->control;
            pos += best->escape.size();
            continue;
        }
        std::size_t next = pos;
        char32_t cp = utf8_decode(text, next);
        if (cp == 0xFFFFFFFF)
            return R::fail("decode-encoding",
                           "invalid UTF-8 at byte " + std::to_string(pos), pos);
        std::string_view raw = text.substr(pos, next - pos);
        bool is_lead = false;
        bool is_control = false;
        for (const auto& r : table.rules) {
            if (std::string_view(r.escape).substr(0, raw.size()) == raw)
                is_lead = true;
            if (r.control == raw) is_control = true;
        }
        if (is_lead)
            return R::fail("decode-dangling-lead",
                           "escape lead '" + display(raw) +
                               "' without a complete escape at byte " +
                               std::to_string(pos),
                           pos);
        if (is_control)
            return R::fail("decode-raw-control",
                           "bare control character '" + display(raw) +
                               "' in encoded text at byte " +
                               std::to_string(pos),
                           pos);
        out += raw;
        pos = next;
    }
    return out;
}

// Custom per-token codecs override table-driven encode/decode.
struct Codec {
    std::function<std::string(std::string_view)> encode;
    std::function<Result<std::string>(std::string_view)> decode;
};

class CodecRegistry {
  public:
    void add(const std::string& grammar, const std::string& token,
             Codec codec) {
        codecs_[{grammar, token}] = std::move(codec);
    }

    const Codec* find(const std::string& grammar,
                      const std::string& token) const {
        auto it = codecs_.find({grammar, token});
        return it == codecs_.end() ? nullptr : &it->second;
    }

    bool empty() const { return codecs_.empty(); }

  private:
    std::map<std::pair<std::string, std::string>, Codec> codecs_;
};

} // namespace armorparse

#endif
