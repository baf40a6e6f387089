#include "synthesis/synthesis.hpp"

#include <set>

#include "common/errors.hpp"
#include "common/text.hpp"

namespace forge::synthesis {

using provider::Message;
using provider::Role;

Json to_json(const MetaOpinion& o) {
    return {{"persona_id", o.persona_id}, {"video_id", o.video_id}, {"group_index", o.group_index},
            {"statement", o.statement}, {"evidence_span", o.evidence_span}};
}

MetaOpinion opinion_from_json(const Json& j) {
    try {
        return {j.at("persona_id").get<std::string>(), j.at("video_id").get<std::string>(),
                j.at("group_index").get<int>(), j.at("statement").get<std::string>(),
                j.at("evidence_span").get<std::string>()};
    } catch (const Json::exception& e) {
        fail(Errc::MalformedRecord, std::string("opinion: ") + e.what());
    }
}

Json to_json(const DialoguePair& p) {
    Json j{{"persona_id", p.persona_id},
           {"opinion_ref", {{"video_id", p.opinion_ref.first}, {"group_index", p.opinion_ref.second}}},
           {"fan_utterance", p.fan_utterance},
           {"persona_reply", p.persona_reply}};
    j["counter_intuitive"] = p.counter_intuitive ? Json(*p.counter_intuitive) : Json(nullptr);
    return j;
}

DialoguePair pair_from_json(const Json& j) {
    try {
        DialoguePair p;
        p.persona_id = j.at("persona_id").get<std::string>();
        p.opinion_ref = {j.at("opinion_ref").at("video_id").get<std::string>(),
                         j.at("opinion_ref").at("group_index").get<int>()};
        p.fan_utterance = j.at("fan_utterance").get<std::string>();
        p.persona_reply = j.at("persona_reply").get<std::string>();
        if (j.contains("counter_intuitive") && !j["counter_intuitive"].is_null())
            p.counter_intuitive = j["counter_intuitive"].get<bool>();
        return p;
    } catch (const Json::exception& e) {
        fail(Errc::MalformedRecord, std::string("dialogue pair: ") + e.what());
    }
}

std::string_view source_kind_name(SourceKind k) noexcept {
    return k == SourceKind::Dialogue ? "dialogue" : "counterintuitive_followup";
}

SynthesisPrompts SynthesisPrompts::defaults() {
    SynthesisPrompts p;
    p.extract_instructions =
        "The user message is a first-person video transcript by a content creator. Extract exactly 10 "
        "meta-opinions: distinct, self-contained statements of the creator's views, advice or domain knowledge. "
        "For each one, quote the supporting passage verbatim from the transcript. Reply with JSON only, in the form "
        "{\"opinions\": [{\"statement\": \"...\", \"evidence\": \"verbatim quote\"}, ...]} with exactly 10 entries.";
    p.dialogue_instructions =
        "Write realistic exchanges between a fan and the creator about the opinion below. The fan asks something "
        "a follower would naturally ask. The creator answers in the first person, staying as close as possible to "
        "the wording of the quoted transcript passage so the creator's tone and knowledge are preserved. Reply with "
        "JSON only: {\"pairs\": [{\"fan\": \"...\", \"persona\": \"...\"}, ...]}.";
    p.verdict_instructions =
        "You compare two answers to the same question. Answer A is a general assistant's answer; answer B is a "
        "content creator's answer. Decide whether B agrees with A in substance and stance. Reply with exactly one "
        "word: consistent or inconsistent.";
    return p;
}

namespace {

struct ExtractAttempt {
    std::vector<MetaOpinion> opinions;
    std::optional<Error> defect;
    std::string feedback;
};

ExtractAttempt parse_opinions(const std::string& reply, const corpus::Transcript& t) {
    ExtractAttempt a;
    auto json = extract_json(reply);
    const Json* list = nullptr;
    if (json && json->is_object() && json->contains("opinions") && (*json)["opinions"].is_array())
        list = &(*json)["opinions"];
    else if (json && json->is_array())
        list = &*json;
    if (!list) {
        a.defect = Error(Errc::ParseFailure, "video '" + t.video_id + "': no JSON opinion list in reply");
        a.feedback = "Your reply did not contain the requested JSON object.";
        return a;
    }
    const auto got = static_cast<int>(list->size());
    if (got != kMetaOpinionsPerTranscript) {
        a.defect = Error(Errc::ExtractionCountMismatch, "got " + std::to_string(got) + " opinions for video '" +
                                                            t.video_id + "', expected 10");
        a.feedback = "You returned " + std::to_string(got) + " opinions. Return exactly 10.";
        return a;
    }
    int group = 0;
    for (const auto& item : *list) {
        ++group;
        std::string statement, evidence;
        if (item.is_object()) {
            statement = trim(item.value("statement", std::string()));
            evidence = item.value("evidence", item.value("evidence_span", std::string()));
        }
        if (statement.empty()) {
            a.defect = Error(Errc::ParseFailure, "video '" + t.video_id + "' opinion " + std::to_string(group) +
                                                     ": missing statement");
            a.feedback = "Opinion " + std::to_string(group) + " has no statement.";
            return a;
        }
        if (!contains_normalized(t.text(), evidence)) {
            a.defect = Error(Errc::ParseFailure, "video '" + t.video_id + "' opinion " + std::to_string(group) +
                                                     ": evidence span not found in transcript: \"" +
                                                     evidence.substr(0, 80) + "\"");
            a.feedback = "The evidence for opinion " + std::to_string(group) +
                         " is not a verbatim quote of the transcript. Quote the transcript exactly.";
            return a;
        }
        a.opinions.push_back({t.persona_id, t.video_id, group, statement, trim(evidence)});
    }
    return a;
}

}  // namespace

std::vector<MetaOpinion> extract_meta_opinions(const corpus::Transcript& t, provider::ChatPort& chat,
                                               const provider::ModelSettings& model, const SynthesisPrompts& prompts) {
    require(t.corrected_text.has_value(), Errc::InvalidRequest,
            "video '" + t.video_id + "' has not been corrected yet");
    require(!trim(*t.corrected_text).empty(), Errc::EmptyTranscript, "video '" + t.video_id + "' is empty");

    std::vector<Message> messages{{Role::System, prompts.extract_instructions}, {Role::User, *t.corrected_text}};
    constexpr int kMaxReprompts = 2;
    for (int attempt = 0;; ++attempt) {
        const auto resp = chat.chat(provider::make_request(model, "extract_meta_opinions", messages));
        auto parsed = parse_opinions(resp.content, t);
        if (!parsed.defect) return parsed.opinions;
        if (attempt == kMaxReprompts) throw *parsed.defect;
        messages.push_back({Role::Assistant, resp.content.empty() ? "(empty)" : resp.content});
        messages.push_back({Role::User, parsed.feedback + " Reply with the corrected JSON only."});
    }
}

std::vector<DialoguePair> synth_dialogues(const MetaOpinion& op, provider::ChatPort& chat, int pairs_per_opinion,
                                          const provider::ModelSettings& model, const SynthesisPrompts& prompts) {
    require(pairs_per_opinion >= 1, Errc::InvalidRequest, "pairs_per_opinion must be >= 1");
    const std::string user = "Opinion: " + op.statement + "\n\nTranscript passage: \"" + op.evidence_span +
                             "\"\n\nReturn exactly " + std::to_string(pairs_per_opinion) + " pairs.";
    std::vector<Message> messages{{Role::System, prompts.dialogue_instructions}, {Role::User, user}};
    std::string last_problem;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const auto resp = chat.chat(provider::make_request(model, "synth_dialogues", messages));
        auto json = extract_json(resp.content);
        const Json* list = nullptr;
        if (json && json->is_object() && json->contains("pairs") && (*json)["pairs"].is_array())
            list = &(*json)["pairs"];
        else if (json && json->is_array())
            list = &*json;

        std::vector<DialoguePair> out;
        if (!list) {
            last_problem = "no JSON pair list in reply";
        } else {
            for (const auto& item : *list) {
                if (static_cast<int>(out.size()) == pairs_per_opinion) break;
                DialoguePair p;
                p.persona_id = op.persona_id;
                p.opinion_ref = {op.video_id, op.group_index};
                if (item.is_object()) {
                    p.fan_utterance = trim(item.value("fan", std::string()));
                    p.persona_reply = trim(item.value("persona", std::string()));
                }
                if (p.fan_utterance.empty() || p.persona_reply.empty()) {
                    last_problem = "pair " + std::to_string(out.size() + 1) + " has an empty turn";
                    out.clear();
                    break;
                }
                out.push_back(std::move(p));
            }
            if (last_problem.empty() && static_cast<int>(out.size()) < pairs_per_opinion)
                last_problem = "got " + std::to_string(out.size()) + " pairs, expected " +
                               std::to_string(pairs_per_opinion);
        }
        if (static_cast<int>(out.size()) == pairs_per_opinion) return out;
        messages.push_back({Role::Assistant, resp.content.empty() ? "(empty)" : resp.content});
        messages.push_back({Role::User, "Problem: " + last_problem + ". Reply with the corrected JSON only."});
    }
    fail(Errc::ParseFailure, "opinion (" + op.video_id + ", " + std::to_string(op.group_index) + "): " + last_problem);
}

bool parse_inconsistent_verdict(std::string_view reply) {
    std::string v = to_lower_ascii(trim(reply));
    auto strip = [&](char c) {
        while (!v.empty() && v.front() == c) v.erase(v.begin());
        while (!v.empty() && v.back() == c) v.pop_back();
    };
    strip('"');
    strip('\'');
    strip('.');
    v = trim(v);
    if (v == "inconsistent") return true;
    if (v == "consistent") return false;
    fail(Errc::VerdictParseFailure, "verdict '" + std::string(reply.substr(0, 40)) + "' is not consistent/inconsistent");
}

DialoguePair flag_counter_intuitive(const DialoguePair& p, provider::ChatPort& chat,
                                    const provider::ModelSettings& answer_model,
                                    const provider::ModelSettings& judge_model, const SynthesisPrompts& prompts) {
    require(!p.counter_intuitive.has_value(), Errc::InvalidRequest, "pair was already filtered");
    const auto direct = chat.chat(provider::make_request(answer_model, "direct_answer", {{Role::User, p.fan_utterance}}));
    auto judge = judge_model;
    judge.temperature = 0.0;
    const std::string user = "Question:\n" + p.fan_utterance + "\n\nAnswer A:\n" + direct.content +
                             "\n\nAnswer B:\n" + p.persona_reply;
    const auto verdict = chat.chat(provider::make_request(
        judge, "consistency_verdict", {{Role::System, prompts.verdict_instructions}, {Role::User, user}}));
    DialoguePair out = p;
    out.counter_intuitive = parse_inconsistent_verdict(verdict.content);
    return out;
}

OpinionLookup make_lookup(const std::vector<MetaOpinion>& opinions) {
    OpinionLookup out;
    for (const auto& o : opinions) out.emplace(OpinionRef{o.video_id, o.group_index}, o);
    return out;
}

std::string followup_user_content(const MetaOpinion& op, const DialoguePair& p) {
    return op.statement + "\n" + p.fan_utterance;
}

std::vector<TrainingExample> build_training_set(const std::vector<DialoguePair>& pairs,
                                                const OpinionLookup& opinions) {
    std::vector<TrainingExample> out;
    out.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        require(p.counter_intuitive.has_value(), Errc::UnfilteredPair,
                "pair " + std::to_string(i) + " has not been through the counter-intuitive filter");
        auto it = opinions.find(p.opinion_ref);
        require(it != opinions.end(), Errc::UnresolvedOpinionRef,
                "pair " + std::to_string(i) + " references (" + p.opinion_ref.first + ", " +
                    std::to_string(p.opinion_ref.second) + ")");
        require(it->second.persona_id == p.persona_id, Errc::MixedPersona,
                "pair " + std::to_string(i) + " belongs to '" + p.persona_id + "' but its opinion to '" +
                    it->second.persona_id + "'");
        out.push_back({p.persona_id, SourceKind::Dialogue,
                       {{Role::User, p.fan_utterance}, {Role::Assistant, p.persona_reply}}});
        if (*p.counter_intuitive)
            out.push_back({p.persona_id, SourceKind::CounterintuitiveFollowup,
                           {{Role::User, followup_user_content(it->second, p)}, {Role::Assistant, p.persona_reply}}});
    }
    return out;
}

Json to_json(const TrainingExample& e) {
    Json msgs = Json::array();
    for (const auto& m : e.messages) msgs.push_back({{"role", provider::role_name(m.role)}, {"content", m.content}});
    return {{"messages", std::move(msgs)}, {"source_kind", source_kind_name(e.source_kind)}};
}

TrainingExample example_from_json(const Json& j, const std::string& persona_id) {
    try {
        TrainingExample e;
        e.persona_id = persona_id;
        const auto kind = j.at("source_kind").get<std::string>();
        if (kind == "dialogue") e.source_kind = SourceKind::Dialogue;
        else if (kind == "counterintuitive_followup") e.source_kind = SourceKind::CounterintuitiveFollowup;
        else fail(Errc::MalformedRecord, "unknown source_kind '" + kind + "'");
        for (const auto& m : j.at("messages"))
            e.messages.push_back({provider::parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
        require(!e.messages.empty() && e.messages.back().role == Role::Assistant, Errc::MalformedRecord,
                "training example must end with an assistant turn");
        return e;
    } catch (const Json::exception& ex) {
        fail(Errc::MalformedRecord, std::string("training example: ") + ex.what());
    }
}

std::string render_training(const std::vector<TrainingExample>& examples) {
    std::set<std::string> personas;
    for (const auto& e : examples) personas.insert(e.persona_id);
    require(personas.size() <= 1, Errc::MixedPersona,
            "training examples span " + std::to_string(personas.size()) + " personas");
    std::vector<Json> rows;
    rows.reserve(examples.size());
    for (const auto& e : examples) rows.push_back(to_json(e));
    return to_jsonl(rows);
}

ExportSummary export_training(const std::vector<TrainingExample>& examples, const std::filesystem::path& path,
                              ExportFormat format) {
    require(format == ExportFormat::ChatJsonl, Errc::InvalidRequest, "unsupported export format");
    const std::string body = render_training(examples);
    write_file_atomic(path, body);
    return {examples.size(), body.size()};
}

std::vector<TrainingExample> import_training(const std::filesystem::path& path, const std::string& persona_id) {
    std::vector<TrainingExample> out;
    for (const auto& row : read_jsonl(path)) out.push_back(example_from_json(row.value, persona_id));
    return out;
}

}  // namespace forge::synthesis
