#include <doctest.h>

#include <set>

#include "evalkit/fan.hpp"
#include "evalkit/mcq.hpp"
#include "evalkit/rubric.hpp"
#include "persona/agent.hpp"
#include "provider/mocks.hpp"
#include "support.hpp"

using namespace forge;
using namespace forge::evalkit;
using forge::test::code_of;

namespace {

corpus::Transcript transcript() {
    corpus::Transcript t;
    t.persona_id = "p1";
    t.video_id = "v1";
    t.raw_text = "Rest steak five minutes. Salt early.";
    t.corrected_text = t.raw_text;
    return t;
}

Json mcq_item(std::vector<std::string> options, int answer = 0) {
    return {{"question", "What should you do?"}, {"options", options}, {"answer_index", answer}, {"rationale", "r"}};
}

std::string mcq_reply(std::vector<Json> items) { return Json{{"items", items}}.dump(); }

McqItem item(int answer) {
    return {"p1", "v1", McqDimension::Knowledge, "Q?", {"a", "b", "c", "d"}, answer, ""};
}

class FixedAnswerer final : public AnswerPort {
public:
    std::function<std::string(const McqItem&, std::size_t)> fn;
    std::string answer(const McqItem& i, std::size_t idx) override { return fn(i, idx); }
};

FanProfile fan(FanType type) {
    FanProfile f;
    f.persona_id = "p1";
    f.fan_type = type;
    for (auto k : kFanAttributeKeys) f.attributes[std::string(k)] = "value of " + std::string(k);
    return f;
}

Json full_profile(bool with_language_style = true) {
    Json j;
    for (auto k : kFanAttributeKeys) j[std::string(k)] = "x";
    if (!with_language_style) j.erase("language_style");
    return j;
}

class DownEndpoint final : public persona::PersonaEndpoint {
public:
    void open() override { fail(Errc::ServiceUnreachable, "connection refused"); }
    std::string reply(const std::string&) override { return "never"; }
};

class EchoEndpoint final : public persona::PersonaEndpoint {
public:
    int opened = 0;
    void open() override { ++opened; }
    std::string reply(const std::string& m) override { return "echo: " + m; }
};

InteractionSession session(FanType type, int rounds = kInteractionRounds) {
    InteractionSession s;
    s.session_id = "s1";
    s.persona_id = "p1";
    s.fan_profile = fan(type);
    for (int r = 0; r < rounds; ++r) s.rounds.push_back({"fan " + std::to_string(r), "persona " + std::to_string(r)});
    return s;
}

}  // namespace

TEST_CASE("mcq generation keeps valid items") {
    auto chat = provider::ScriptedChat::sequence(
        {mcq_reply({mcq_item({"a", "b", "c", "d"}, 1), mcq_item({"w", "x", "y", "z"}, 3)})});
    auto batch = gen_mcq(transcript(), McqDimension::Tone, *chat, 2);
    REQUIRE(batch.items.size() == 2);
    CHECK(batch.dropped == 0);
    for (const auto& i : batch.items) {
        CHECK(i.dimension == McqDimension::Tone);
        CHECK(i.video_id == "v1");
    }
    CHECK(batch.items[1].answer_index == 3);
    CHECK(mcq_from_json(to_json(batch.items[0])) == batch.items[0]);
}

TEST_CASE("invalid mcq items are dropped and counted") {
    auto three = provider::ScriptedChat::sequence({mcq_reply({mcq_item({"a", "b", "c", "d"}), mcq_item({"a", "b", "c"})}),
                                                   mcq_reply({mcq_item({"a", "b", "c"})})});
    auto batch = gen_mcq(transcript(), McqDimension::Knowledge, *three, 2);
    CHECK(batch.items.size() == 1);
    CHECK(batch.dropped == 1);
    CHECK(three->calls() == 3);

    auto dup = provider::ScriptedChat::sequence({mcq_reply({mcq_item({"a", "b", "c", "d"}), mcq_item({"a", "b", "B ", "d"})}),
                                                 mcq_reply({})});
    batch = gen_mcq(transcript(), McqDimension::Knowledge, *dup, 2);
    CHECK(batch.items.size() == 1);
    CHECK(batch.dropped == 1);

    auto garbage = provider::ScriptedChat::sequence({"I cannot help with that."});
    CHECK(code_of([&] { gen_mcq(transcript(), McqDimension::Knowledge, *garbage, 2); }) == Errc::ParseFailure);

    McqItem bad = item(4);
    CHECK(item_problem(bad).has_value());
    CHECK_FALSE(item_problem(item(2)).has_value());
}

TEST_CASE("answer letters") {
    CHECK(parse_answer_letter("B") == 1);
    CHECK(parse_answer_letter("b") == 1);
    CHECK(parse_answer_letter(" c)") == 2);
    CHECK(parse_answer_letter("(C) because it rests") == 2);
    CHECK(parse_answer_letter("The answer is D.") == 3);
    CHECK(parse_answer_letter("A good cook picks B") == 1);
    CHECK(parse_answer_letter("A") == 0);
    CHECK_FALSE(parse_answer_letter("no idea").has_value());
    CHECK_FALSE(parse_answer_letter("E").has_value());
    const auto q = format_question(item(0));
    CHECK(q.find("A. a\nB. b\nC. c\nD. d\n") != std::string::npos);
}

TEST_CASE("grading") {
    std::vector<McqItem> items;
    for (int i = 0; i < 20; ++i) items.push_back(item(i % 4));
    OracleAnswerer oracle;
    CHECK(grade_mcq(items, oracle).accuracy == 1.0);

    FixedAnswerer half;
    half.fn = [](const McqItem& it, std::size_t idx) {
        return std::string(1, static_cast<char>('A' + (idx < 10 ? it.answer_index : (it.answer_index + 1) % 4)));
    };
    auto g = grade_mcq(items, half, WorkerPool(4));
    CHECK(g.accuracy == 0.5);
    CHECK(g.correct == 10);
    REQUIRE(g.records.size() == 20);
    CHECK(g.records[3].item_index == 3);

    FixedAnswerer mute;
    mute.fn = [](const McqItem&, std::size_t) { return std::string("pass"); };
    g = grade_mcq(items, mute);
    CHECK(g.accuracy == 0.0);
    CHECK(g.parse_failures == 20);
    CHECK(code_of([&] { grade_mcq({}, oracle); }) == Errc::InvalidRequest);
}

TEST_CASE("random answerer is independent of grading order") {
    std::vector<McqItem> items;
    for (int i = 0; i < 200; ++i) items.push_back(item(i % 4));
    RandomAnswerer a(5), b(5);
    CHECK(grade_mcq(items, a, WorkerPool(1)).correct == grade_mcq(items, b, WorkerPool(4)).correct);
}

TEST_CASE("persona answerer uses a fresh session per item") {
    std::vector<std::size_t> history_sizes;
    std::mutex mu;
    auto chat = std::make_shared<provider::FunctionChat>([&](const provider::ChatRequest& r) {
        std::lock_guard lock(mu);
        history_sizes.push_back(r.messages.size());
        return std::string("B");
    });
    auto agent = std::make_shared<persona::PersonaAgent>(corpus::PersonaRecord{"p1", "P", "f", "profile", true},
                                                         persona::AgentConfig{}, chat);
    PersonaAnswerer answerer(agent, persona::ServeMode::ProfileOnly);
    auto g = grade_mcq({item(1), item(2), item(1)}, answerer);
    CHECK(g.correct == 2);
    for (auto n : history_sizes) CHECK(n == 2);
}

TEST_CASE("fan profiles") {
    corpus::PersonaRecord p{"p1", "P", "skincare", "profile", true};
    auto ok = provider::ScriptedChat::sequence({full_profile().dump()});
    auto f = synth_fan_profile(p, {}, FanType::New, *ok);
    CHECK(f.attributes.size() == 6);
    CHECK(f.fan_type == FanType::New);
    CHECK(fan_profile_from_json(to_json(f)) == f);

    CHECK(code_of([&] { synth_fan_profile(p, {}, FanType::Old, *ok); }) == Errc::NoComments);

    auto missing = provider::ScriptedChat::sequence({full_profile(false).dump()});
    try {
        synth_fan_profile(p, {}, FanType::New, *missing);
        FAIL("expected ParseFailure");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ParseFailure);
        CHECK(std::string(e.what()).find("language_style") != std::string::npos);
    }
    CHECK(missing->calls() == 2);

    std::string prompt;
    provider::FunctionChat spy([&](const provider::ChatRequest& r) {
        prompt = provider::last_user_content(r);
        return full_profile().dump();
    });
    corpus::Comment c{"c1", "p1", "v1", "Love the cast iron tip", "fan-1"};
    auto old = synth_fan_profile(p, {c}, FanType::Old, spy);
    CHECK(prompt.find("Love the cast iron tip") != std::string::npos);
    CHECK(old.source_comment_ids == std::vector<std::string>{"c1"});
}

TEST_CASE("interaction simulation") {
    auto fan_chat = provider::ScriptedChat::sequence({"What pan?", "Why?", "How hot?", "How long?", "Thanks!"});
    EchoEndpoint persona;
    auto s = simulate_interaction(fan(FanType::New), persona, transcript(), *fan_chat, "s1");
    CHECK(persona.opened == 1);
    REQUIRE(s.rounds.size() == 5);
    CHECK(s.rounds[0].fan_msg == "What pan?");
    CHECK(s.rounds[0].persona_msg == "echo: What pan?");
    CHECK(s.rounds[4].persona_msg == "echo: Thanks!");
    CHECK(s.grounding_video_id == "v1");
    CHECK(session_from_json(to_json(s)) == s);

    DownEndpoint down;
    provider::EchoChat unused;
    CHECK(code_of([&] { simulate_interaction(fan(FanType::New), down, transcript(), unused, "s2"); }) ==
          Errc::ServiceUnreachable);
    CHECK(unused.calls() == 0);

    auto quiet = provider::ScriptedChat::sequence({"one", "two", "", "four", "five"});
    EchoEndpoint p2;
    try {
        simulate_interaction(fan(FanType::New), p2, transcript(), *quiet, "s3");
        FAIL("expected EmptyTurn");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptyTurn);
        CHECK(std::string(e.what()).find("round 3") != std::string::npos);
    }
}

TEST_CASE("fan turns see the persona as the other speaker") {
    std::vector<provider::ChatRequest> seen;
    provider::FunctionChat fan_chat([&](const provider::ChatRequest& r) {
        seen.push_back(r);
        return std::string("q") + std::to_string(seen.size());
    });
    EchoEndpoint persona;
    simulate_interaction(fan(FanType::Old), persona, transcript(), fan_chat, "s", {}, 3);
    REQUIRE(seen.size() == 3);
    CHECK(seen[0].messages.front().content.find("Rest steak five minutes.") != std::string::npos);
    const auto& last = seen[2].messages;
    REQUIRE(last.size() == 6);
    CHECK(last[2].content == "q1");
    CHECK(last[3].content == "echo: q1");
}

TEST_CASE("judge scores exactly the fan type's dimensions") {
    provider::FunctionChat judge([](const provider::ChatRequest& r) {
        if (r.task == "judge_CC") return std::string(R"({"score": 2, "justification": "ok"})");
        if (r.task == "judge_IA") return std::string("Score: 3");
        return std::string(R"({"score": 1})");
    });
    auto scores = judge_session(session(FanType::New), judge);
    REQUIRE(scores.size() == 3);
    CHECK(scores[0] == RubricScore{Dimension::CC, 2, "ok"});
    CHECK(scores[1].dimension == Dimension::IA);
    CHECK(scores[1].score == 3);
    CHECK(scores[2].dimension == Dimension::EA);
    CHECK(scores[2].score == 1);

    provider::FunctionChat any([](const provider::ChatRequest&) { return std::string("2"); });
    auto old = judge_session(session(FanType::Old), any);
    std::set<Dimension> dims;
    for (const auto& s : old) dims.insert(s.dimension);
    CHECK(dims == std::set<Dimension>{Dimension::FR, Dimension::CR, Dimension::CA});

    provider::FunctionChat four([](const provider::ChatRequest& r) {
        return r.task == "judge_CR" ? std::string("4") : std::string("2");
    });
    try {
        judge_session(session(FanType::Old), four);
        FAIL("expected ScoreParseFailure");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ScoreParseFailure);
        CHECK(std::string(e.what()).find("CR") != std::string::npos);
    }
    CHECK(code_of([&] { judge_session(session(FanType::New, 4), any); }) == Errc::IncompleteSession);
}

TEST_CASE("judge prompt carries the rubric at temperature zero") {
    std::vector<provider::ChatRequest> seen;
    provider::FunctionChat judge([&](const provider::ChatRequest& r) {
        seen.push_back(r);
        return std::string("1");
    });
    provider::ModelSettings warm;
    warm.temperature = 0.9;
    judge_session(session(FanType::New), judge, warm);
    REQUIRE(seen.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(seen[i].temperature == 0.0);
        const auto d = dimensions_for(FanType::New)[i];
        CHECK(seen[i].messages[0].content.find(rubric_block(d)) != std::string::npos);
        for (auto anchor : rubric(d).anchors) CHECK(seen[i].messages[0].content.find(anchor) != std::string::npos);
    }
}

TEST_CASE("score parsing") {
    CHECK(parse_score(R"({"score": 3, "justification": "j"})", Dimension::CC)->score == 3);
    CHECK(parse_score("I'd give it a 2 overall", Dimension::CC)->score == 2);
    CHECK_FALSE(parse_score("4", Dimension::CC));
    CHECK_FALSE(parse_score("0", Dimension::CC));
    CHECK_FALSE(parse_score("12", Dimension::CC));
    CHECK_FALSE(parse_score("no number", Dimension::CC));
}

TEST_CASE("rubric tables") {
    for (auto t : {FanType::New, FanType::Old})
        for (auto d : dimensions_for(t)) {
            CHECK(fan_type_of(d) == t);
            CHECK(parse_dimension(dimension_code(d)) == d);
            for (auto a : rubric(d).anchors) CHECK_FALSE(a.empty());
        }
    CHECK(parse_fan_type("old") == FanType::Old);
    CHECK(code_of([] { parse_dimension("XX"); }) != Errc::Ok);
}

TEST_CASE("judged session json") {
    JudgedSession j{"s1", "p1", "profile_rag", FanType::Old, {{Dimension::FR, 1, "a"}, {Dimension::CR, 2, ""}, {Dimension::CA, 3, "c"}}};
    auto back = judged_from_json(to_json(j));
    CHECK(back.session_id == "s1");
    CHECK(back.fan_type == FanType::Old);
    CHECK(back.scores == j.scores);
}
