#include "evalkit/mcq.hpp"

#include <random>
#include <set>

#include <spdlog/spdlog.h>

#include "common/digest.hpp"
#include "common/errors.hpp"
#include "common/text.hpp"

namespace forge::evalkit {

using provider::Message;
using provider::Role;

std::string_view mcq_dimension_name(McqDimension d) noexcept {
    return d == McqDimension::Knowledge ? "knowledge" : "tone";
}

McqDimension parse_mcq_dimension(std::string_view s) {
    if (s == "knowledge") return McqDimension::Knowledge;
    if (s == "tone") return McqDimension::Tone;
    fail(Errc::Usage, "unknown MCQ dimension '" + std::string(s) + "' (expected knowledge or tone)");
}

std::optional<std::string> item_problem(const McqItem& item) {
    if (trim(item.question).empty()) return "empty question";
    if (item.options.size() != kMcqOptions)
        return "expected 4 options, got " + std::to_string(item.options.size());
    std::set<std::string> distinct;
    for (const auto& o : item.options) {
        if (trim(o).empty()) return "empty option";
        if (!distinct.insert(collapse_whitespace(to_lower_ascii(o))).second) return "duplicate option '" + o + "'";
    }
    if (item.answer_index < 0 || item.answer_index >= static_cast<int>(kMcqOptions))
        return "answer_index " + std::to_string(item.answer_index) + " out of range";
    return std::nullopt;
}

Json to_json(const McqItem& item) {
    return {{"persona_id", item.persona_id}, {"video_id", item.video_id},
            {"dimension", mcq_dimension_name(item.dimension)}, {"question", item.question},
            {"options", item.options}, {"answer_index", item.answer_index}, {"rationale", item.rationale}};
}

McqItem mcq_from_json(const Json& j) {
    try {
        McqItem m;
        m.persona_id = j.at("persona_id").get<std::string>();
        m.video_id = j.at("video_id").get<std::string>();
        m.dimension = parse_mcq_dimension(j.at("dimension").get<std::string>());
        m.question = j.at("question").get<std::string>();
        m.options = j.at("options").get<std::vector<std::string>>();
        m.answer_index = j.at("answer_index").get<int>();
        m.rationale = j.value("rationale", std::string());
        return m;
    } catch (const Json::exception& e) {
        fail(Errc::MalformedRecord, std::string("mcq item: ") + e.what());
    }
}

namespace {

std::string mcq_instructions(McqDimension d, std::size_t n) {
    std::string focus =
        d == McqDimension::Knowledge
            ? "the creator's professional knowledge and distinctive domain opinions, including views that differ "
              "from mainstream advice"
            : "the creator's speaking style: catchphrases, tone and characteristic ways of expressing things";
    return "The user message is a first-person video transcript by a content creator. Write exactly " +
           std::to_string(n) +
           " multiple-choice questions that test " + focus +
           ". Each question simulates a fan's question and asks which reply the creator would give; answering it "
           "must involve some reasoning. Give exactly 4 distinct options with one correct answer. The wrong "
           "options must be plausible but must not match the creator's opinions or speaking style. Reply with "
           "JSON only: {\"items\": [{\"question\": \"...\", \"options\": [\"...\", \"...\", \"...\", \"...\"], "
           "\"answer_index\": 0, \"rationale\": \"...\"}]}.";
}

std::vector<McqItem> parse_items(const std::string& reply, const corpus::Transcript& t, McqDimension d,
                                 std::size_t& invalid, bool& unparseable) {
    std::vector<McqItem> out;
    auto json = extract_json(reply);
    const Json* list = nullptr;
    if (json && json->is_object() && json->contains("items") && (*json)["items"].is_array()) list = &(*json)["items"];
    else if (json && json->is_array()) list = &*json;
    if (!list) {
        unparseable = true;
        return out;
    }
    for (const auto& row : *list) {
        McqItem m;
        m.persona_id = t.persona_id;
        m.video_id = t.video_id;
        m.dimension = d;
        bool shape_ok = row.is_object();
        if (shape_ok) {
            try {
                m.question = row.at("question").get<std::string>();
                m.options = row.at("options").get<std::vector<std::string>>();
                m.answer_index = row.at("answer_index").get<int>();
                m.rationale = row.value("rationale", std::string());
            } catch (const Json::exception&) {
                shape_ok = false;
            }
        }
        if (!shape_ok || item_problem(m)) {
            ++invalid;
            continue;
        }
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace

McqBatch gen_mcq(const corpus::Transcript& t, McqDimension dimension, provider::ChatPort& chat, std::size_t n_items,
                 const provider::ModelSettings& model) {
    require(n_items >= 1, Errc::InvalidRequest, "n_items must be >= 1");
    require(t.corrected_text.has_value(), Errc::InvalidRequest, "video '" + t.video_id + "' has not been corrected");

    McqBatch batch;
    std::vector<Message> messages{{Role::System, mcq_instructions(dimension, n_items)}, {Role::User, t.text()}};
    const std::string task = "gen_mcq_" + std::string(mcq_dimension_name(dimension));
    bool any_parsed = false;
    constexpr int kReRequests = 2;
    for (int attempt = 0; attempt <= kReRequests && batch.items.size() < n_items; ++attempt) {
        const auto resp = chat.chat(provider::make_request(model, task, messages));
        std::size_t invalid = 0;
        bool unparseable = false;
        auto fresh = parse_items(resp.content, t, dimension, invalid, unparseable);
        any_parsed = any_parsed || !unparseable;
        for (auto& item : fresh) {
            if (batch.items.size() == n_items) break;
            batch.items.push_back(std::move(item));
        }
        const auto missing = n_items - batch.items.size();
        if (missing == 0) break;
        messages.push_back({Role::Assistant, resp.content.empty() ? "(empty)" : resp.content});
        messages.push_back({Role::User, std::to_string(invalid) + " item(s) were invalid or missing. Write exactly " +
                                            std::to_string(missing) +
                                            " new question(s), each with 4 distinct options, in the same JSON form."});
    }
    require(any_parsed || !batch.items.empty(), Errc::ParseFailure,
            "video '" + t.video_id + "': no parseable question list in any reply");
    batch.dropped = n_items - batch.items.size();
    if (batch.dropped > 0)
        spdlog::warn("gen_mcq: dropped {} invalid item(s) for video '{}'", batch.dropped, t.video_id);
    return batch;
}

std::string format_question(const McqItem& item) {
    std::string out = item.question + "\n";
    for (std::size_t i = 0; i < item.options.size(); ++i)
        out += std::string(1, static_cast<char>('A' + i)) + ". " + item.options[i] + "\n";
    out += "Answer with a single letter A-D.";
    return out;
}

std::optional<int> parse_answer_letter(std::string_view reply) {
    const std::string s = trim(reply);
    if (s.size() == 1) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
        if (c >= 'A' && c <= 'D') return c - 'A';
        return std::nullopt;
    }
    auto is_alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        // Lowercase only counts in list form: "c)".
        if (c >= 'a' && c <= 'd' && i + 1 < s.size() && s[i + 1] == ')')
            c = static_cast<char>(c - 'a' + 'A');
        if (c < 'A' || c > 'D') continue;
        const bool left_ok = i == 0 || !is_alpha(s[i - 1]);
        const bool right_ok = i + 1 == s.size() || !is_alpha(s[i + 1]);
        // A capital "A" opening a sentence is an article, not a choice.
        if (c == 'A' && right_ok && i + 1 < s.size() && s[i + 1] == ' ' && i + 2 < s.size() &&
            std::islower(static_cast<unsigned char>(s[i + 2])) && (i == 0 || s[i - 1] == ' '))
            continue;
        if (left_ok && right_ok) return c - 'A';
    }
    return std::nullopt;
}

std::string OracleAnswerer::answer(const McqItem& item, std::size_t) {
    return std::string(1, static_cast<char>('A' + item.answer_index));
}

std::string RandomAnswerer::answer(const McqItem&, std::size_t index) {
    std::mt19937_64 rng(mix64(seed_ ^ mix64(index)));
    std::uniform_int_distribution<int> pick(0, static_cast<int>(kMcqOptions) - 1);
    return std::string(1, static_cast<char>('A' + pick(rng)));
}

std::string PersonaAnswerer::answer(const McqItem& item, std::size_t index) {
    auto session = agent_->new_session("mcq-" + std::to_string(index), mode_);
    return agent_->respond(session, format_question(item), "mcq_answer");
}

GradeResult grade_mcq(const std::vector<McqItem>& items, AnswerPort& answerer, const WorkerPool& pool) {
    require(!items.empty(), Errc::InvalidRequest, "no items to grade");
    GradeResult g;
    g.total = items.size();
    g.records = pool.map<GradeRecord>(items.size(), [&](std::size_t i) {
        GradeRecord r;
        r.item_index = i;
        r.gold = items[i].answer_index;
        r.chosen = parse_answer_letter(answerer.answer(items[i], i));
        r.parse_failed = !r.chosen.has_value();
        r.correct = r.chosen && *r.chosen == r.gold;
        return r;
    });
    for (const auto& r : g.records) {
        g.correct += r.correct ? 1 : 0;
        g.parse_failures += r.parse_failed ? 1 : 0;
    }
    g.accuracy = static_cast<double>(g.correct) / static_cast<double>(g.total);
    return g;
}

Json to_json(const GradeResult& g) {
    Json recs = Json::array();
    for (const auto& r : g.records)
        recs.push_back({{"item_index", r.item_index}, {"gold", r.gold},
                        {"chosen", r.chosen ? Json(*r.chosen) : Json(nullptr)}, {"correct", r.correct},
                        {"parse_failed", r.parse_failed}});
    return {{"accuracy", g.accuracy}, {"correct", g.correct}, {"total", g.total},
            {"parse_failures", g.parse_failures}, {"records", std::move(recs)}};
}

}  // namespace forge::evalkit
