#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "common/json_io.hpp"
#include "retrieval/tokenizer.hpp"

namespace forge::retrieval {

struct SourceText {
    std::string video_id;
    std::string text;
};

struct Chunk {
    std::string persona_id;
    std::size_t chunk_id = 0;
    std::string text;
    std::size_t token_count = 0;
    std::string video_id;
    // Byte range of `text` inside the newline-normalized transcript.
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const Chunk&) const = default;
};

Json to_json(const Chunk& c);
Chunk chunk_from_json(const Json& j);

inline constexpr std::size_t kDefaultMaxTokens = 500;

// Splits each transcript independently into chunks of at most `max_tokens`
// tokens. Sentences are packed greedily; a sentence longer than the budget is
// cut at token boundaries. Joining the chunk texts in chunk_id order gives
// back normalized_corpus(sources) exactly.
std::vector<Chunk> chunk_text(const std::string& persona_id, const std::vector<SourceText>& sources,
                              const TokenizerPort& tokenizer, std::size_t max_tokens = kDefaultMaxTokens);

// Newline-normalized transcripts concatenated in order, skipping any that
// contain no tokens at all.
std::string normalized_corpus(const std::vector<SourceText>& sources, const TokenizerPort& tokenizer);

// Byte ranges of the sentences in `text`; they tile the whole string.
std::vector<std::pair<std::size_t, std::size_t>> split_sentences(std::string_view text);

}  // namespace forge::retrieval
