#include "evalkit/fan.hpp"

#include <algorithm>
#include <cctype>

#include "common/errors.hpp"
#include "common/text.hpp"
#include "retrieval/chunker.hpp"

namespace forge::evalkit {

using provider::Message;
using provider::Role;

Json to_json(const FanProfile& f) {
    return {{"persona_id", f.persona_id}, {"fan_type", fan_type_name(f.fan_type)}, {"attributes", f.attributes},
            {"source_comment_ids", f.source_comment_ids}};
}

FanProfile fan_profile_from_json(const Json& j) {
    try {
        FanProfile f;
        f.persona_id = j.at("persona_id").get<std::string>();
        f.fan_type = parse_fan_type(j.at("fan_type").get<std::string>());
        f.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
        f.source_comment_ids = j.value("source_comment_ids", std::vector<std::string>{});
        return f;
    } catch (const Json::exception& e) {
        fail(Errc::MalformedRecord, std::string("fan profile: ") + e.what());
    }
}

namespace {

std::string profile_instructions(const corpus::PersonaRecord& persona, FanType type,
                                 const std::vector<corpus::Comment>& comments, int variant) {
    std::string keys;
    for (auto k : kFanAttributeKeys) keys += (keys.empty() ? "" : ", ") + std::string(k);
    std::string out;
    if (type == FanType::Old) {
        out = "Below are comments left by long-time followers of " + persona.display_name + " (" +
              persona.field_tag +
              "). Describe one representative existing fan of this creator, consistent with the comments.\n\n"
              "Comments:\n";
        for (const auto& c : comments) out += "- " + c.text + "\n";
    } else {
        out = "Describe one plausible newcomer who is interested in " + persona.field_tag + " but has never watched " +
              persona.display_name + ".\n";
    }
    if (variant > 0) out += "\nThis is audience member #" + std::to_string(variant) + "; make them distinct.\n";
    out += "\nReply with JSON only: one object with the string keys " + keys + ".";
    return out;
}

std::vector<std::string> missing_keys(const Json* obj) {
    std::vector<std::string> missing;
    for (auto k : kFanAttributeKeys) {
        const std::string key(k);
        if (!obj || !obj->contains(key) || !(*obj)[key].is_string() || trim((*obj)[key].get<std::string>()).empty())
            missing.push_back(key);
    }
    return missing;
}

}  // namespace

FanProfile synth_fan_profile(const corpus::PersonaRecord& persona, const std::vector<corpus::Comment>& comments,
                             FanType fan_type, provider::ChatPort& chat, const provider::ModelSettings& model,
                             int variant) {
    if (fan_type == FanType::Old)
        require(!comments.empty(), Errc::NoComments, "no comments for persona '" + persona.persona_id + "'");

    std::vector<Message> messages{{Role::System, "You design audience profiles for evaluating content creators."},
                                  {Role::User, profile_instructions(persona, fan_type, comments, variant)}};
    const std::string task = "fan_profile_" + std::string(fan_type_name(fan_type));
    std::vector<std::string> missing;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const auto resp = chat.chat(provider::make_request(model, task, messages));
        const auto json = extract_json(resp.content);
        const Json* obj = json && json->is_object() ? &*json : nullptr;
        missing = missing_keys(obj);
        if (missing.empty()) {
            FanProfile f;
            f.persona_id = persona.persona_id;
            f.fan_type = fan_type;
            for (auto k : kFanAttributeKeys) f.attributes[std::string(k)] = trim((*obj)[std::string(k)].get<std::string>());
            if (fan_type == FanType::Old)
                for (const auto& c : comments) f.source_comment_ids.push_back(c.comment_id);
            return f;
        }
        messages.push_back({Role::Assistant, resp.content.empty() ? "(empty)" : resp.content});
        messages.push_back({Role::User, "The profile is missing: " + join(missing, ", ") +
                                            ". Reply again with all keys as a single JSON object."});
    }
    fail(Errc::ParseFailure, "fan profile missing key(s): " + join(missing, ", "));
}

Json to_json(const InteractionSession& s) {
    Json rounds = Json::array();
    for (const auto& r : s.rounds) rounds.push_back({{"fan", r.fan_msg}, {"persona", r.persona_msg}});
    return {{"session_id", s.session_id},   {"persona_id", s.persona_id},
            {"mode", s.mode},               {"grounding_video_id", s.grounding_video_id},
            {"fan_profile", to_json(s.fan_profile)}, {"rounds", std::move(rounds)}};
}

InteractionSession session_from_json(const Json& j) {
    try {
        InteractionSession s;
        s.session_id = j.at("session_id").get<std::string>();
        s.persona_id = j.at("persona_id").get<std::string>();
        s.mode = j.value("mode", std::string());
        s.grounding_video_id = j.at("grounding_video_id").get<std::string>();
        s.fan_profile = fan_profile_from_json(j.at("fan_profile"));
        for (const auto& r : j.at("rounds"))
            s.rounds.push_back({r.at("fan").get<std::string>(), r.at("persona").get<std::string>()});
        return s;
    } catch (const Json::exception& e) {
        fail(Errc::MalformedRecord, std::string("session: ") + e.what());
    }
}

std::string video_topic(const corpus::Transcript& t) {
    constexpr std::size_t kMaxTopicBytes = 300;
    const auto& text = t.text();
    const auto sentences = retrieval::split_sentences(text);
    std::string topic;
    if (!sentences.empty()) {
        const auto [b, e] = sentences.front();
        topic = trim(std::string_view(text).substr(b, e - b));
    }
    if (topic.size() > kMaxTopicBytes) {
        std::size_t cut = kMaxTopicBytes;
        while (cut > 0 && (static_cast<unsigned char>(topic[cut]) & 0xC0) == 0x80) --cut;
        topic = topic.substr(0, cut) + "...";
    }
    return topic;
}

namespace {

std::string fan_system_prompt(const FanProfile& fan, const std::string& topic) {
    std::string out = "You are role-playing a ";
    out += fan.fan_type == FanType::New ? "viewer who has just discovered this creator"
                                        : "long-time fan of this creator";
    out += ". Your profile:\n";
    for (const auto& [k, v] : fan.attributes) out += "- " + k + ": " + v + "\n";
    out += "\nThe conversation is about the creator's video on: " + topic +
           "\nWrite only your next message to the creator, in your own language style. Ask about things you care "
           "about and react to what the creator says.";
    return out;
}

}  // namespace

InteractionSession simulate_interaction(const FanProfile& fan, persona::PersonaEndpoint& persona,
                                        const corpus::Transcript& video, provider::ChatPort& fan_chat,
                                        std::string session_id, const provider::ModelSettings& model, int rounds) {
    require(rounds >= 1, Errc::InvalidRequest, "rounds must be >= 1");
    persona.open();

    InteractionSession s;
    s.session_id = std::move(session_id);
    s.fan_profile = fan;
    s.persona_id = fan.persona_id;
    s.grounding_video_id = video.video_id;

    // The fan model speaks as the assistant; persona turns arrive as user turns.
    std::vector<Message> messages{{Role::System, fan_system_prompt(fan, video_topic(video))},
                                  {Role::User, "(You open the conversation. Send your first message.)"}};
    for (int r = 1; r <= rounds; ++r) {
        const auto resp = fan_chat.chat(provider::make_request(model, "fan_turn", messages));
        const auto fan_msg = trim(resp.content);
        require(!fan_msg.empty(), Errc::EmptyTurn, "fan turn is empty in round " + std::to_string(r));
        const auto reply = trim(persona.reply(fan_msg));
        require(!reply.empty(), Errc::EmptyTurn, "persona turn is empty in round " + std::to_string(r));
        s.rounds.push_back({fan_msg, reply});
        messages.push_back({Role::Assistant, fan_msg});
        messages.push_back({Role::User, reply});
    }
    return s;
}

Json to_json(const RubricScore& s) {
    return {{"dimension", dimension_code(s.dimension)}, {"score", s.score}, {"justification", s.justification}};
}

RubricScore score_from_json(const Json& j) {
    try {
        RubricScore s;
        s.dimension = parse_dimension(j.at("dimension").get<std::string>());
        s.score = j.at("score").get<int>();
        s.justification = j.value("justification", std::string());
        require(s.score >= 1 && s.score <= 3, Errc::MalformedRecord, "score out of range");
        return s;
    } catch (const Json::exception& e) {
        fail(Errc::MalformedRecord, std::string("score: ") + e.what());
    }
}

std::optional<RubricScore> parse_score(std::string_view reply, Dimension d) {
    RubricScore out;
    out.dimension = d;
    if (const auto json = extract_json(reply); json && json->is_object() && json->contains("score")) {
        const auto& v = (*json)["score"];
        int score = 0;
        if (v.is_number_integer()) score = v.get<int>();
        else if (v.is_string() && v.get<std::string>().size() == 1) score = v.get<std::string>()[0] - '0';
        else return std::nullopt;
        if (score < 1 || score > 3) return std::nullopt;
        out.score = score;
        if (json->contains("justification") && (*json)["justification"].is_string())
            out.justification = (*json)["justification"].get<std::string>();
        return out;
    }
    // First standalone number in the text.
    const std::string s(reply);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) continue;
        std::size_t j = i;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        if (j - i != 1 || s[i] < '1' || s[i] > '3') return std::nullopt;
        out.score = s[i] - '0';
        out.justification = trim(s);
        return out;
    }
    return std::nullopt;
}

std::string render_dialogue(const InteractionSession& s) {
    std::string out;
    for (std::size_t i = 0; i < s.rounds.size(); ++i) {
        out += "Round " + std::to_string(i + 1) + "\nFan: " + s.rounds[i].fan_msg + "\nCreator: " +
               s.rounds[i].persona_msg + "\n";
    }
    return out;
}

std::vector<RubricScore> judge_session(const InteractionSession& s, provider::ChatPort& chat,
                                       provider::ModelSettings model, int expected_rounds) {
    require(s.rounds.size() == static_cast<std::size_t>(expected_rounds), Errc::IncompleteSession,
            "session '" + s.session_id + "' has " + std::to_string(s.rounds.size()) + " rounds");
    model.temperature = 0.0;
    std::string fan_desc;
    for (const auto& [k, v] : s.fan_profile.attributes) fan_desc += "- " + k + ": " + v + "\n";

    std::vector<RubricScore> scores;
    for (const auto d : dimensions_for(s.fan_profile.fan_type)) {
        const std::string system =
            "You evaluate a conversation between a content creator and one of their " +
            std::string(s.fan_profile.fan_type == FanType::New ? "new" : "old") +
            " fans, from the fan's point of view. Score exactly one dimension using this rubric:\n\n" +
            rubric_block(d) +
            "\n\nReply with JSON only: {\"score\": 1, 2 or 3, \"justification\": \"...\"}.";
        std::vector<Message> messages{
            {Role::System, system},
            {Role::User, "Fan profile:\n" + fan_desc + "\nConversation:\n" + render_dialogue(s) +
                             "\nDimension to score: " + std::string(dimension_code(d))}};
        const std::string task = "judge_" + std::string(dimension_code(d));
        std::optional<RubricScore> parsed;
        for (int attempt = 0; attempt < 2 && !parsed; ++attempt) {
            const auto resp = chat.chat(provider::make_request(model, task, messages));
            parsed = parse_score(resp.content, d);
            if (!parsed) {
                messages.push_back({Role::Assistant, resp.content.empty() ? "(empty)" : resp.content});
                messages.push_back({Role::User, "The score must be 1, 2 or 3. Reply again in the JSON form."});
            }
        }
        if (!parsed) fail(Errc::ScoreParseFailure, "no valid score for " + std::string(dimension_code(d)));
        scores.push_back(std::move(*parsed));
    }
    return scores;
}

Json to_json(const JudgedSession& j) {
    Json scores = Json::array();
    for (const auto& s : j.scores) scores.push_back(to_json(s));
    return {{"session_id", j.session_id}, {"persona_id", j.persona_id}, {"mode", j.mode},
            {"fan_type", fan_type_name(j.fan_type)}, {"scores", std::move(scores)}};
}

JudgedSession judged_from_json(const Json& j) {
    try {
        JudgedSession out;
        out.session_id = j.at("session_id").get<std::string>();
        out.persona_id = j.at("persona_id").get<std::string>();
        out.mode = j.value("mode", std::string());
        out.fan_type = parse_fan_type(j.at("fan_type").get<std::string>());
        for (const auto& s : j.at("scores")) out.scores.push_back(score_from_json(s));
        return out;
    } catch (const Json::exception& e) {
        fail(Errc::MalformedRecord, std::string("scores record: ") + e.what());
    }
}

}  // namespace forge::evalkit
