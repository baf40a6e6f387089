#include "provider/synthetic_backend.hpp"

#include <array>
#include <regex>

#include "common/digest.hpp"
#include "common/json_io.hpp"
#include "common/text.hpp"
#include "retrieval/chunker.hpp"

namespace forge::provider {

namespace {

std::vector<std::string> sentences_of(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& [b, e] : retrieval::split_sentences(text)) {
        auto s = trim(std::string_view(text).substr(b, e - b));
        if (!s.empty()) out.push_back(std::move(s));
    }
    return out;
}

std::size_t requested_count(const std::string& text, std::size_t fallback) {
    static const std::regex re(R"(exactly (\d+))");
    std::smatch m;
    if (std::regex_search(text, m, re)) return std::stoul(m[1].str());
    return fallback;
}

const std::string& first_user(const ChatRequest& req) {
    for (const auto& m : req.messages)
        if (m.role == Role::User) return m.content;
    static const std::string empty;
    return empty;
}

const std::string& system_text(const ChatRequest& req) {
    static const std::string empty;
    return !req.messages.empty() && req.messages.front().role == Role::System ? req.messages.front().content : empty;
}

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& options, std::uint64_t h) {
    return options[h % N];
}

std::string extract_opinions(const ChatRequest& req) {
    auto sentences = sentences_of(first_user(req));
    if (sentences.empty()) sentences.push_back(trim(first_user(req)));
    Json list = Json::array();
    for (std::size_t i = 0; i < 10; ++i) {
        const auto& s = sentences[i % sentences.size()];
        list.push_back({{"statement", "The creator holds that " + s}, {"evidence", s}});
    }
    return Json{{"opinions", list}}.dump();
}

std::string dialogue_pairs(const ChatRequest& req, std::uint64_t h) {
    static const std::regex opinion_re(R"(Opinion: ([^\n]*))");
    const auto& user = first_user(req);
    std::smatch m;
    const std::string statement = std::regex_search(user, m, opinion_re) ? m[1].str() : std::string("that depends");
    static constexpr std::array<std::string_view, 4> openers = {
        "Quick question:", "I have always wondered,", "Honest question here:", "Maybe a silly one, but"};
    Json pairs = Json::array();
    const auto n = requested_count(user, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto hi = mix64(h + i);
        pairs.push_back({{"fan", std::string(pick(openers, hi)) + " what is your take on this topic?"},
                         {"persona", "Here is how I see it. " + statement}});
    }
    return Json{{"pairs", pairs}}.dump();
}

std::string mcq_items(const ChatRequest& req, std::uint64_t h) {
    auto sentences = sentences_of(first_user(req));
    if (sentences.empty()) sentences.push_back("it depends on the situation");
    const bool tone = req.task == "gen_mcq_tone";
    Json items = Json::array();
    const auto n = requested_count(system_text(req), 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto hi = mix64(h ^ (i + 1));
        const auto& truth = sentences[hi % sentences.size()];
        std::vector<std::string> options{truth, "Whatever the popular advice says is always right.",
                                         "I never talk about this subject.", "Just skip it, it makes no difference."};
        const int answer = static_cast<int>(mix64(hi) % 4);
        std::swap(options[0], options[static_cast<std::size_t>(answer)]);
        items.push_back({{"question", tone ? "How would the creator phrase their advice here? (" + std::to_string(i + 1) + ")"
                                           : "A fan asks about this video. What would the creator answer? (" +
                                                 std::to_string(i + 1) + ")"},
                         {"options", options},
                         {"answer_index", answer},
                         {"rationale", "Stated in the transcript."}});
    }
    return Json{{"items", items}}.dump();
}

// Picks the option found in the system prompt's context, if any; otherwise a
// hashed guess. This lets retrieval-backed modes outscore profile_only.
std::string mcq_answer(const ChatRequest& req, std::uint64_t h) {
    const auto& question = last_user_content(req);
    const auto& system = system_text(req);
    static const std::regex option_re(R"(^([A-D])\. (.*)$)", std::regex::multiline);
    for (auto it = std::sregex_iterator(question.begin(), question.end(), option_re); it != std::sregex_iterator();
         ++it) {
        const auto option = (*it)[2].str();
        if (option.size() > 12 && contains_normalized(system, option)) return (*it)[1].str();
    }
    return std::string(1, static_cast<char>('A' + h % 4));
}

std::string fan_profile(const ChatRequest& req, std::uint64_t h) {
    const bool old_fan = req.task == "fan_profile_old";
    static constexpr std::array<std::string_view, 4> ages = {"18-24", "25-30", "31-40", "41-55"};
    static constexpr std::array<std::string_view, 3> styles = {"casual and chatty", "short and direct",
                                                               "curious, lots of questions"};
    return Json{{"age_range", pick(ages, h)},
                {"interests", old_fan ? "follows every upload, tries the recipes" : "home cooking basics"},
                {"lifestyle", old_fan ? "cooks most evenings" : "busy schedule, often eats out"},
                {"career_tendencies", pick(std::array<std::string_view, 3>{"office worker", "student", "nurse"}, h >> 8)},
                {"consumption_habits", old_fan ? "buys gear the creator recommends" : "budget conscious"},
                {"language_style", pick(styles, h >> 16)}}
        .dump();
}

std::string fan_turn(const ChatRequest& req, std::uint64_t h) {
    static constexpr std::array<std::string_view, 5> asks = {
        "Can you explain that part again?", "What would you do differently at home?",
        "Is there a cheaper way to do this?", "How long did it take you to learn that?",
        "What is the most common mistake people make?"};
    const std::size_t turn = (req.messages.size() - 1) / 2 + 1;
    return "(" + std::to_string(turn) + ") " + std::string(pick(asks, h));
}

std::string persona_reply(const ChatRequest& req, std::uint64_t h) {
    const auto& system = system_text(req);
    static const std::string marker = "Reference material from your own videos:\n";
    if (const auto pos = system.find(marker); pos != std::string::npos) {
        const auto sentences = sentences_of(system.substr(pos + marker.size()));
        if (!sentences.empty()) return "From my videos: " + sentences[h % sentences.size()];
    }
    static constexpr std::array<std::string_view, 3> generic = {
        "Good question! Keep it simple and trust your taste.", "I get asked that a lot. Practice beats theory.",
        "Honestly, start small and adjust as you go."};
    return std::string(pick(generic, h));
}

std::string judge(std::uint64_t h) {
    const int score = 1 + static_cast<int>(h % 3);
    return Json{{"score", score}, {"justification", "Synthetic judgement."}}.dump();
}

}  // namespace

ChatResponse SyntheticChat::respond(const ChatRequest& req) {
    const auto h = stable_hash(canonical_dump(to_json(req)), seed_ ^ stable_hash(req.task));
    const auto& task = req.task;
    std::string out;
    if (task == "correct_transcript") out = last_user_content(req);
    else if (task == "extract_meta_opinions") out = extract_opinions(req);
    else if (task == "synth_dialogues") out = dialogue_pairs(req, h);
    else if (task == "direct_answer") out = "In general most people would say it depends on your goals.";
    else if (task == "consistency_verdict") out = h % 10 < 3 ? "inconsistent" : "consistent";
    else if (starts_with(task, "gen_mcq")) out = mcq_items(req, h);
    else if (task == "mcq_answer") out = mcq_answer(req, h);
    else if (starts_with(task, "fan_profile")) out = fan_profile(req, h);
    else if (task == "fan_turn") out = fan_turn(req, h);
    else if (task == "persona_reply") out = persona_reply(req, h);
    else if (starts_with(task, "judge")) out = judge(h);
    else out = last_user_content(req);
    return {out, FinishReason::Complete, {}};
}

}  // namespace forge::provider
