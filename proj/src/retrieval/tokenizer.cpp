#include "retrieval/tokenizer.hpp"

namespace forge::retrieval {

namespace {

enum class CharClass { Space, Letter, Digit, Cjk, Punct };

struct Decoded {
    char32_t cp;
    std::size_t len;
};

Decoded decode_utf8(std::string_view s, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) return {b0, 1};
    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) len = 2, cp = b0 & 0x1F;
    else if ((b0 & 0xF0) == 0xE0) len = 3, cp = b0 & 0x0F;
    else if ((b0 & 0xF8) == 0xF0) len = 4, cp = b0 & 0x07;
    else return {0xFFFD, 1};
    if (i + len > s.size()) return {0xFFFD, 1};
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
        cp = (cp << 6) | (b & 0x3F);
    }
    return {cp, len};
}

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

CharClass classify(char32_t cp) {
    if (cp < 0x80) {
        if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v') return CharClass::Space;
        if (cp >= '0' && cp <= '9') return CharClass::Digit;
        if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || cp == '_') return CharClass::Letter;
        return CharClass::Punct;
    }
    if (cp == 0xFFFD) return CharClass::Punct;
    if (cp == 0x00A0 || cp == 0x3000 || in(cp, 0x2000, 0x200B) || cp == 0x2028 || cp == 0x2029)
        return CharClass::Space;
    if (in(cp, 0x4E00, 0x9FFF) || in(cp, 0x3400, 0x4DBF) || in(cp, 0x3040, 0x30FF) || in(cp, 0xAC00, 0xD7AF) ||
        in(cp, 0xF900, 0xFAFF) || in(cp, 0x20000, 0x2FFFF))
        return CharClass::Cjk;
    if (in(cp, 0x0080, 0x00BF) || cp == 0x00D7 || cp == 0x00F7 || in(cp, 0x2010, 0x206F) ||
        in(cp, 0x3001, 0x303F) || in(cp, 0xFF01, 0xFF0F) || in(cp, 0xFF1A, 0xFF20) || in(cp, 0xFF3B, 0xFF40) ||
        in(cp, 0xFF5B, 0xFF65) || in(cp, 0x2190, 0x2BFF) || in(cp, 0x1F000, 0x1FAFF))
        return CharClass::Punct;
    return CharClass::Letter;
}

template <class Sink>
void scan(std::string_view text, Sink&& sink) {
    std::size_t i = 0;
    while (i < text.size()) {
        const auto d = decode_utf8(text, i);
        const auto cls = classify(d.cp);
        if (cls == CharClass::Space) {
            i += d.len;
            continue;
        }
        const std::size_t begin = i;
        i += d.len;
        if (cls == CharClass::Letter || cls == CharClass::Digit) {
            while (i < text.size()) {
                const auto next = decode_utf8(text, i);
                if (classify(next.cp) != cls) break;
                i += next.len;
            }
        }
        sink(TokenSpan{begin, i});
    }
}

}  // namespace

std::vector<TokenSpan> DefaultTokenizer::tokenize(std::string_view text) const {
    std::vector<TokenSpan> out;
    scan(text, [&](TokenSpan t) { out.push_back(t); });
    return out;
}

std::size_t DefaultTokenizer::count(std::string_view text) const {
    std::size_t n = 0;
    scan(text, [&](TokenSpan) { ++n; });
    return n;
}

}  // namespace forge::retrieval
