#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "common/json_io.hpp"
#include "common/worker_pool.hpp"
#include "corpus/scrub.hpp"
#include "provider/chat.hpp"
#include "retrieval/tokenizer.hpp"

namespace forge::corpus {

struct PersonaRecord {
    std::string persona_id;
    std::string display_name;
    std::string field_tag;     // professional field, e.g. "skincare"
    std::string profile_text;  // fan-written profile
    bool authorized = false;

    bool operator==(const PersonaRecord&) const = default;
};

struct Transcript {
    std::string persona_id;
    std::string video_id;
    std::string raw_text;  // ASR output, never modified after ingest
    std::optional<std::string> subtitle_text;
    std::optional<std::string> corrected_text;
    std::size_t token_count = 0;

    // The best available text: corrected when present, raw otherwise.
    const std::string& text() const noexcept { return corrected_text ? *corrected_text : raw_text; }
    bool operator==(const Transcript&) const = default;
};

struct Comment {
    std::string comment_id;
    std::string persona_id;
    std::string video_id;
    std::string text;
    std::string author_alias;

    bool operator==(const Comment&) const = default;
};

struct CorpusBundle {
    PersonaRecord persona;
    std::vector<Transcript> transcripts;
    std::vector<Comment> comments;  // grouped by video, in transcript order

    const Transcript* find_transcript(std::string_view video_id) const;
    std::vector<const Comment*> comments_for(std::string_view video_id) const;
    bool operator==(const CorpusBundle&) const = default;
};

Json to_json(const PersonaRecord& p);
Json to_json(const Transcript& t);
Json to_json(const Comment& c);
Json to_json(const CorpusBundle& b);
CorpusBundle bundle_from_json(const Json& j);

std::string canonical_serialize(const CorpusBundle& b);

// Stable pseudonym for a commenter; never equal to the original name.
std::string pseudonymize(std::string_view persona_id, std::string_view author);

// Reads `<persona_dir>/{profile.json,transcripts.jsonl,comments.jsonl}`.
// Identical duplicate transcript rows collapse to one; a video_id repeated
// with a different body is a DuplicateVideoId error. Comment authors are
// pseudonymized and comment text is scrubbed.
CorpusBundle ingest_corpus(const std::filesystem::path& persona_dir, const std::string& persona_id,
                           const retrieval::TokenizerPort& tokenizer,
                           const ScrubRuleSet& rules = ScrubRuleSet::defaults());

// Writes the bundle back out in the layout ingest_corpus reads.
void write_corpus_dir(const CorpusBundle& bundle, const std::filesystem::path& persona_dir);

// Asks the model to repair ASR errors, using subtitles as a reference when
// available. raw_text and subtitle_text are carried over untouched.
Transcript correct_transcript(const Transcript& t, provider::ChatPort& chat,
                              const retrieval::TokenizerPort& tokenizer,
                              const provider::ModelSettings& model = {});

// Corrects every transcript, then scrubs the corrected text.
CorpusBundle clean_bundle(const CorpusBundle& bundle, provider::ChatPort& chat,
                          const retrieval::TokenizerPort& tokenizer, const ScrubRuleSet& rules,
                          const provider::ModelSettings& model = {}, const WorkerPool& pool = WorkerPool{});

}  // namespace forge::corpus
