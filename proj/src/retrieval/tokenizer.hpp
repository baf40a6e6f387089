#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace forge::retrieval {

struct TokenSpan {
    std::size_t begin = 0;  // byte offsets into the tokenized text
    std::size_t end = 0;
};

class TokenizerPort {
public:
    virtual ~TokenizerPort() = default;
    // Recorded in every index so an index is never reused under another tokenizer.
    virtual std::string tag() const = 0;
    virtual std::vector<TokenSpan> tokenize(std::string_view text) const = 0;
    virtual std::size_t count(std::string_view text) const { return tokenize(text).size(); }
};

// Offline tokenizer: runs of letters form one token, runs of ASCII digits one
// token, each CJK ideograph/kana/hangul syllable one token, each punctuation
// mark one token. Whitespace separates and is never a token. Input is UTF-8;
// an invalid byte counts as a single punctuation token.
class DefaultTokenizer final : public TokenizerPort {
public:
    std::string tag() const override { return "forge-default-v1"; }
    std::vector<TokenSpan> tokenize(std::string_view text) const override;
    std::size_t count(std::string_view text) const override;
};

}  // namespace forge::retrieval
