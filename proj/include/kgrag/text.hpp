#pragma once
// Text primitives shared across the engine: the ws-v1 whitespace tokenizer,
// entity-name normalization, and the FNV-1a hash used for feature hashing
// and config fingerprints. All routines are deterministic and locale-free.

#include "kgrag/error.hpp"

#include <cstdint>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace kgrag {

// Byte range [begin, end) of one token inside the source string.
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

namespace detail {

// Decodes the UTF-8 code point starting at s[i]; advances i past it.
// Invalid sequences are consumed one byte at a time and returned verbatim,
// so malformed input still tokenizes deterministically.
inline uint32_t decode_utf8(std::string_view s, std::size_t& i) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    auto cont = [&](std::size_t k) {
        return i + k < s.size() &&
               (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(1)) {
        uint32_t cp = (uint32_t(b0 & 0x1F) << 6) |
                      (static_cast<unsigned char>(s[i + 1]) & 0x3F);
        i += 2;
        return cp;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        uint32_t cp = (uint32_t(b0 & 0x0F) << 12) |
                      (uint32_t(static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6) |
                      (static_cast<unsigned char>(s[i + 2]) & 0x3F);
        i += 3;
        return cp;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        uint32_t cp = (uint32_t(b0 & 0x07) << 18) |
                      (uint32_t(static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12) |
                      (uint32_t(static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6) |
                      (static_cast<unsigned char>(s[i + 3]) & 0x3F);
        i += 4;
        return cp;
    }
    ++i;
    return b0;
}

} // namespace detail

// Unicode whitespace as recognized by the ws-v1 tokenizer. Pinned set:
// ASCII controls+space, NEL, NBSP, OGHAM, the U+2000 block, LS/PS,
// NNBSP, MMSP and ideographic space.
inline bool is_unicode_space(uint32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// ws-v1: split on runs of Unicode whitespace, returning byte spans.
inline std::vector<TokenSpan> tokenize_spans(std::string_view text) {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    std::size_t token_begin = 0;
    bool in_token = false;
    while (i < text.size()) {
        std::size_t at = i;
        uint32_t cp = detail::decode_utf8(text, i);
        if (is_unicode_space(cp)) {
            if (in_token) {
                spans.push_back({token_begin, at});
                in_token = false;
            }
        } else if (!in_token) {
            token_begin = at;
            in_token = true;
        }
    }
    if (in_token) spans.push_back({token_begin, text.size()});
    return spans;
}

inline constexpr const char* kDefaultTokenizerId = "ws-v1";

// Registry entry point. Only ws-v1 is built in; the id is recorded in store
// manifests so stores stay self-describing.
inline std::vector<std::string> tokenize(std::string_view text,
                                         std::string_view tokenizer_id = kDefaultTokenizerId) {
    if (tokenizer_id != kDefaultTokenizerId)
        throw ArgumentError("unknown tokenizer: " + std::string(tokenizer_id));
    std::vector<std::string> out;
    for (const auto& sp : tokenize_spans(text))
        out.emplace_back(text.substr(sp.begin, sp.end - sp.begin));
    return out;
}

inline std::size_t count_tokens(std::string_view text) {
    return tokenize_spans(text).size();
}

inline std::string lowercase_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline bool is_ascii_punct(char c) {
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
           (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

// Trims ASCII punctuation from both ends of a token ("sign." -> "sign").
inline std::string_view strip_punct_edges(std::string_view tok) {
    std::size_t b = 0, e = tok.size();
    while (b < e && is_ascii_punct(tok[b])) ++b;
    while (e > b && is_ascii_punct(tok[e - 1])) --e;
    return tok.substr(b, e - b);
}

// Entity-name normalization: lowercase, trim, collapse internal whitespace
// runs to a single space. Normalized equality defines entity identity.
inline std::string normalize_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    bool pending_space = false;
    std::size_t i = 0;
    while (i < name.size()) {
        std::size_t at = i;
        uint32_t cp = detail::decode_utf8(name, i);
        if (is_unicode_space(cp)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        for (std::size_t k = at; k < i; ++k) {
            char c = name[k];
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            out.push_back(c);
        }
    }
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_unicode_space(static_cast<unsigned char>(s[b])) &&
           static_cast<unsigned char>(s[b]) < 0x80)
        ++b;
    while (e > b && is_unicode_space(static_cast<unsigned char>(s[e - 1])) &&
           static_cast<unsigned char>(s[e - 1]) < 0x80)
        --e;
    return std::string(s.substr(b, e - b));
}

inline constexpr uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr uint64_t kFnvPrime = 1099511628211ULL;

// FNV-1a over bytes; the seed is xor-folded into the offset basis.
inline uint64_t fnv1a64(std::string_view data, uint64_t seed = 0) {
    uint64_t h = kFnvOffset ^ seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

// Truncates to at most max_bytes without splitting a UTF-8 sequence.
inline std::string cap_utf8(std::string_view s, std::size_t max_bytes) {
    if (s.size() <= max_bytes) return std::string(s);
    std::size_t e = max_bytes;
    while (e > 0 && (static_cast<unsigned char>(s[e]) & 0xC0) == 0x80) --e;
    return std::string(s.substr(0, e));
}

} // namespace kgrag
