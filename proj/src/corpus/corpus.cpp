#include "corpus/corpus.hpp"

#include <map>
#include <set>

#include "common/digest.hpp"
#include "common/errors.hpp"
#include "common/text.hpp"

namespace forge::corpus {

const Transcript* CorpusBundle::find_transcript(std::string_view video_id) const {
    for (const auto& t : transcripts)
        if (t.video_id == video_id) return &t;
    return nullptr;
}

std::vector<const Comment*> CorpusBundle::comments_for(std::string_view video_id) const {
    std::vector<const Comment*> out;
    for (const auto& c : comments)
        if (c.video_id == video_id) out.push_back(&c);
    return out;
}

Json to_json(const PersonaRecord& p) {
    return {{"persona_id", p.persona_id}, {"display_name", p.display_name}, {"field_tag", p.field_tag},
            {"profile_text", p.profile_text}, {"authorized", p.authorized}};
}

Json to_json(const Transcript& t) {
    Json j{{"persona_id", t.persona_id}, {"video_id", t.video_id}, {"raw_text", t.raw_text},
           {"token_count", t.token_count}};
    if (t.subtitle_text) j["subtitle_text"] = *t.subtitle_text;
    if (t.corrected_text) j["corrected_text"] = *t.corrected_text;
    return j;
}

Json to_json(const Comment& c) {
    return {{"comment_id", c.comment_id}, {"persona_id", c.persona_id}, {"video_id", c.video_id},
            {"text", c.text}, {"author_alias", c.author_alias}};
}

Json to_json(const CorpusBundle& b) {
    Json ts = Json::array();
    for (const auto& t : b.transcripts) ts.push_back(to_json(t));
    Json cs = Json::array();
    for (const auto& c : b.comments) cs.push_back(to_json(c));
    return {{"persona", to_json(b.persona)}, {"transcripts", std::move(ts)}, {"comments", std::move(cs)}};
}

namespace {

std::optional<std::string> opt_string(const Json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<std::string>();
}

PersonaRecord persona_from_json(const Json& j) {
    PersonaRecord p;
    p.persona_id = j.at("persona_id").get<std::string>();
    p.display_name = j.value("display_name", p.persona_id);
    p.field_tag = j.value("field_tag", std::string());
    p.profile_text = j.at("profile_text").get<std::string>();
    p.authorized = j.value("authorized", false);
    return p;
}

}  // namespace

CorpusBundle bundle_from_json(const Json& j) {
    try {
        CorpusBundle b;
        b.persona = persona_from_json(j.at("persona"));
        for (const auto& t : j.at("transcripts")) {
            Transcript tr;
            tr.persona_id = t.at("persona_id").get<std::string>();
            tr.video_id = t.at("video_id").get<std::string>();
            tr.raw_text = t.at("raw_text").get<std::string>();
            tr.subtitle_text = opt_string(t, "subtitle_text");
            tr.corrected_text = opt_string(t, "corrected_text");
            tr.token_count = t.at("token_count").get<std::size_t>();
            b.transcripts.push_back(std::move(tr));
        }
        for (const auto& c : j.at("comments")) {
            b.comments.push_back({c.at("comment_id").get<std::string>(), c.at("persona_id").get<std::string>(),
                                  c.at("video_id").get<std::string>(), c.at("text").get<std::string>(),
                                  c.at("author_alias").get<std::string>()});
        }
        return b;
    } catch (const Json::exception& e) {
        fail(Errc::MalformedRecord, std::string("bundle: ") + e.what());
    }
}

std::string canonical_serialize(const CorpusBundle& b) { return canonical_dump(to_json(b)); }

std::string pseudonymize(std::string_view persona_id, std::string_view author) {
    std::string material(persona_id);
    material += '\x1f';
    material += author;
    std::string alias = "fan_" + sha256_hex(material).substr(0, 12);
    if (alias == author) alias = "fan_" + sha256_hex(material + "\x1f").substr(0, 12);
    return alias;
}

CorpusBundle ingest_corpus(const std::filesystem::path& persona_dir, const std::string& persona_id,
                           const retrieval::TokenizerPort& tokenizer, const ScrubRuleSet& rules) {
    namespace fs = std::filesystem;
    const fs::path profile_path = persona_dir / "profile.json";
    require(fs::exists(profile_path), Errc::MissingProfile, profile_path.string() + " not found");

    CorpusBundle bundle;
    {
        auto j = Json::parse(read_text_file(profile_path), nullptr, false);
        require(!j.is_discarded() && j.is_object(), Errc::MalformedRecord, "profile.json line 1: not a JSON object");
        try {
            bundle.persona = persona_from_json(j);
        } catch (const Json::exception& e) {
            fail(Errc::MalformedRecord, std::string("profile.json line 1: ") + e.what());
        }
    }
    auto& persona = bundle.persona;
    require(persona.persona_id == persona_id, Errc::MalformedRecord,
            "profile.json line 1: persona_id '" + persona.persona_id + "' does not match '" + persona_id + "'");
    require(!persona.persona_id.empty(), Errc::MalformedRecord, "profile.json line 1: empty persona_id");
    require(!trim(persona.profile_text).empty(), Errc::MalformedRecord, "profile.json line 1: empty profile_text");
    require(persona.authorized, Errc::UnauthorizedPersona, "persona '" + persona_id + "' is not authorized");

    std::map<std::string, std::string> seen_bodies;  // video_id -> canonical row
    const fs::path transcripts_path = persona_dir / "transcripts.jsonl";
    if (fs::exists(transcripts_path)) {
        for (auto& row : read_jsonl(transcripts_path)) {
            const auto where = "transcripts.jsonl line " + std::to_string(row.line);
            Transcript t;
            try {
                const auto& j = row.value;
                require(j.is_object(), Errc::MalformedRecord, where + ": not an object");
                if (j.contains("persona_id"))
                    require(j["persona_id"] == persona_id, Errc::MalformedRecord, where + ": foreign persona_id");
                t.persona_id = persona_id;
                t.video_id = j.at("video_id").get<std::string>();
                t.raw_text = j.at("raw_text").get<std::string>();
                t.subtitle_text = opt_string(j, "subtitle_text");
                t.corrected_text = opt_string(j, "corrected_text");
            } catch (const Json::exception& e) {
                fail(Errc::MalformedRecord, where + ": " + e.what());
            }
            require(!t.video_id.empty(), Errc::MalformedRecord, where + ": empty video_id");
            t.token_count = tokenizer.count(t.text());
            const std::string body = canonical_dump(to_json(t));
            if (auto it = seen_bodies.find(t.video_id); it != seen_bodies.end()) {
                require(it->second == body, Errc::DuplicateVideoId,
                        where + ": video_id '" + t.video_id + "' repeated with a different body");
                continue;
            }
            seen_bodies.emplace(t.video_id, body);
            bundle.transcripts.push_back(std::move(t));
        }
    }

    const fs::path comments_path = persona_dir / "comments.jsonl";
    std::map<std::string, std::vector<Comment>> by_video;
    std::set<std::string> comment_ids;
    if (fs::exists(comments_path)) {
        for (auto& row : read_jsonl(comments_path)) {
            const auto where = "comments.jsonl line " + std::to_string(row.line);
            Comment c;
            try {
                const auto& j = row.value;
                require(j.is_object(), Errc::MalformedRecord, where + ": not an object");
                c.persona_id = persona_id;
                c.video_id = j.at("video_id").get<std::string>();
                c.text = scrub_private(j.at("text").get<std::string>(), rules);
                if (j.contains("author")) c.author_alias = pseudonymize(persona_id, j["author"].get<std::string>());
                else c.author_alias = j.at("author_alias").get<std::string>();
                c.comment_id = j.value("comment_id", std::string());
            } catch (const Json::exception& e) {
                fail(Errc::MalformedRecord, where + ": " + e.what());
            }
            require(seen_bodies.count(c.video_id) > 0, Errc::MalformedRecord,
                    where + ": comment references unknown video_id '" + c.video_id + "'");
            auto& bucket = by_video[c.video_id];
            if (c.comment_id.empty()) c.comment_id = c.video_id + "#" + std::to_string(bucket.size() + 1);
            require(comment_ids.insert(c.comment_id).second, Errc::MalformedRecord,
                    where + ": duplicate comment_id '" + c.comment_id + "'");
            bucket.push_back(std::move(c));
        }
    }
    for (const auto& t : bundle.transcripts) {
        auto it = by_video.find(t.video_id);
        if (it == by_video.end()) continue;
        for (auto& c : it->second) bundle.comments.push_back(std::move(c));
    }
    return bundle;
}

void write_corpus_dir(const CorpusBundle& bundle, const std::filesystem::path& persona_dir) {
    write_file_atomic(persona_dir / "profile.json", canonical_dump(to_json(bundle.persona)) + "\n");
    std::vector<Json> ts, cs;
    for (const auto& t : bundle.transcripts) ts.push_back(to_json(t));
    for (const auto& c : bundle.comments) cs.push_back(to_json(c));
    write_file_atomic(persona_dir / "transcripts.jsonl", to_jsonl(ts));
    write_file_atomic(persona_dir / "comments.jsonl", to_jsonl(cs));
}

Transcript correct_transcript(const Transcript& t, provider::ChatPort& chat,
                              const retrieval::TokenizerPort& tokenizer, const provider::ModelSettings& model) {
    require(!trim(t.raw_text).empty(), Errc::EmptyTranscript, "video '" + t.video_id + "' has an empty transcript");
    std::string system =
        "You repair speech-recognition errors in a video transcript. Fix misrecognized words, "
        "punctuation and obvious typos. Keep the speaker's wording, tone and first-person voice. "
        "Do not summarize, translate or add content. Reply with the corrected transcript only.";
    if (t.subtitle_text && !t.subtitle_text->empty())
        system += "\n\nOn-screen subtitles recognized from the same video (they may also contain errors):\n" +
                  *t.subtitle_text;
    const auto resp = chat.chat(provider::make_request(
        model, "correct_transcript",
        {{provider::Role::System, std::move(system)}, {provider::Role::User, t.raw_text}}));
    require(resp.finish_reason != provider::FinishReason::Refused, Errc::ProviderFailure,
            "correction refused for video '" + t.video_id + "'");
    Transcript out = t;
    out.corrected_text = trim(resp.content);
    out.token_count = tokenizer.count(*out.corrected_text);
    return out;
}

CorpusBundle clean_bundle(const CorpusBundle& bundle, provider::ChatPort& chat,
                          const retrieval::TokenizerPort& tokenizer, const ScrubRuleSet& rules,
                          const provider::ModelSettings& model, const WorkerPool& pool) {
    CorpusBundle out = bundle;
    pool.for_each_index(out.transcripts.size(), [&](std::size_t i) {
        auto fixed = correct_transcript(bundle.transcripts[i], chat, tokenizer, model);
        fixed.corrected_text = scrub_private(*fixed.corrected_text, rules);
        fixed.token_count = tokenizer.count(*fixed.corrected_text);
        out.transcripts[i] = std::move(fixed);
    });
    return out;
}

}  // namespace forge::corpus
