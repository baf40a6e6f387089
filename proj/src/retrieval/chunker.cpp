#include "retrieval/chunker.hpp"

#include "common/errors.hpp"
#include "common/text.hpp"

namespace forge::retrieval {

Json to_json(const Chunk& c) {
    return {{"persona_id", c.persona_id}, {"chunk_id", c.chunk_id}, {"text", c.text},
            {"token_count", c.token_count}, {"video_id", c.video_id}, {"begin", c.begin}, {"end", c.end}};
}

Chunk chunk_from_json(const Json& j) {
    Chunk c;
    c.persona_id = j.at("persona_id").get<std::string>();
    c.chunk_id = j.at("chunk_id").get<std::size_t>();
    c.text = j.at("text").get<std::string>();
    c.token_count = j.at("token_count").get<std::size_t>();
    c.video_id = j.at("video_id").get<std::string>();
    c.begin = j.at("begin").get<std::size_t>();
    c.end = j.at("end").get<std::size_t>();
    return c;
}

namespace {

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Length of a sentence terminator starting at i, or 0.
std::size_t terminator_at(std::string_view t, std::size_t i) {
    const char c = t[i];
    if (c == '.' || c == '!' || c == '?' || c == '\n') return 1;
    static constexpr std::string_view kWide[] = {"\xE3\x80\x82", "\xEF\xBC\x81", "\xEF\xBC\x9F", "\xE2\x80\xA6"};
    for (auto w : kWide)
        if (t.substr(i, w.size()) == w) return w.size();
    return 0;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> split_sentences(std::string_view text) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t term = terminator_at(text, i);
        if (term == 0) {
            ++i;
            continue;
        }
        std::size_t j = i + term;
        // Runs of terminators ("?!", "...") stay with the sentence.
        while (j < text.size() && terminator_at(text, j) && text[j] != '\n') j += terminator_at(text, j);
        const bool boundary = text[i] == '\n' || j >= text.size() || is_ws(text[j]) || term > 1;
        if (!boundary) {
            i = j;
            continue;
        }
        while (j < text.size() && is_ws(text[j])) ++j;
        out.emplace_back(start, j);
        start = i = j;
    }
    if (start < text.size()) out.emplace_back(start, text.size());
    return out;
}

std::string normalized_corpus(const std::vector<SourceText>& sources, const TokenizerPort& tokenizer) {
    std::string out;
    for (const auto& s : sources) {
        std::string norm = normalize_newlines(s.text);
        if (tokenizer.count(norm) > 0) out += norm;
    }
    return out;
}

std::vector<Chunk> chunk_text(const std::string& persona_id, const std::vector<SourceText>& sources,
                              const TokenizerPort& tokenizer, std::size_t max_tokens) {
    require(max_tokens >= 1, Errc::InvalidRequest, "max_tokens must be >= 1");
    std::vector<Chunk> chunks;
    for (const auto& src : sources) {
        const std::string text = normalize_newlines(src.text);
        const std::size_t first_of_video = chunks.size();

        struct Pending {
            std::size_t begin = 0, end = 0, tokens = 0;
            bool open = false;
        } cur;
        auto emit = [&](std::size_t b, std::size_t e, std::size_t tokens) {
            Chunk c;
            c.persona_id = persona_id;
            c.chunk_id = chunks.size();
            c.text = text.substr(b, e - b);
            c.token_count = tokens;
            c.video_id = src.video_id;
            c.begin = b;
            c.end = e;
            chunks.push_back(std::move(c));
        };
        auto extend = [&](std::size_t b, std::size_t e, std::size_t tokens) {
            if (!cur.open) cur = {b, e, 0, true};
            cur.end = e;
            cur.tokens += tokens;
        };

        for (auto [sb, se] : split_sentences(text)) {
            const std::string_view sentence = std::string_view(text).substr(sb, se - sb);
            const auto spans = tokenizer.tokenize(sentence);
            const std::size_t n = spans.size();
            if (n == 0 || (cur.open && cur.tokens + n <= max_tokens)) {
                extend(sb, se, n);
                continue;
            }
            if (n <= max_tokens) {
                if (cur.open && cur.tokens > 0) emit(cur.begin, cur.end, cur.tokens);
                const std::size_t b = cur.open && cur.tokens == 0 ? cur.begin : sb;
                cur = {b, se, n, true};
                continue;
            }
            // Oversized sentence: flush, then cut every max_tokens tokens. A
            // token-free prefix still pending is glued onto the first piece.
            std::size_t piece_begin = sb;
            if (cur.open && cur.tokens > 0) emit(cur.begin, cur.end, cur.tokens);
            else if (cur.open) piece_begin = cur.begin;
            cur = {};
            std::size_t k = 0;
            while (n - k > max_tokens) {
                const std::size_t cut = sb + spans[k + max_tokens].begin;
                emit(piece_begin, cut, max_tokens);
                piece_begin = cut;
                k += max_tokens;
            }
            cur = {piece_begin, se, n - k, true};
        }
        if (cur.open && cur.tokens > 0) {
            emit(cur.begin, cur.end, cur.tokens);
        } else if (cur.open && chunks.size() > first_of_video) {
            auto& last = chunks.back();
            last.text += text.substr(cur.begin, cur.end - cur.begin);
            last.end = cur.end;
        }
    }
    require(!chunks.empty(), Errc::EmptyCorpus, "corpus contains no tokens");
    return chunks;
}

}  // namespace forge::retrieval
