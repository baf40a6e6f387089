#include <doctest.h>

#include "common/text.hpp"
#include "corpus/corpus.hpp"
#include "corpus/scrub.hpp"
#include "provider/mocks.hpp"
#include "retrieval/tokenizer.hpp"
#include "support.hpp"

using namespace forge;
using namespace forge::corpus;
using forge::test::code_of;

namespace {

const retrieval::DefaultTokenizer tok;

void write_persona(const std::filesystem::path& dir, bool authorized = true) {
    test::write(dir / "profile.json",
                Json{{"persona_id", "p1"},
                     {"display_name", "P One"},
                     {"field_tag", "skincare"},
                     {"profile_text", "Calm and precise."},
                     {"authorized", authorized}}
                    .dump());
}

}  // namespace

TEST_CASE("ingest preserves counts") {
    test::TempDir d;
    write_persona(d.path());
    test::write(d / "transcripts.jsonl",
                "{\"video_id\":\"v1\",\"raw_text\":\"one two\"}\n{\"video_id\":\"v2\",\"raw_text\":\"three\"}\n");
    test::write(d / "comments.jsonl",
                "{\"video_id\":\"v1\",\"text\":\"nice\",\"author\":\"Ann\"}\n"
                "{\"video_id\":\"v2\",\"text\":\"ok\",\"author\":\"Bob\"}\n"
                "{\"video_id\":\"v1\",\"text\":\"wow\",\"author\":\"Cy\"}\n");
    auto b = ingest_corpus(d.path(), "p1", tok);
    CHECK(b.transcripts.size() == 2);
    REQUIRE(b.comments.size() == 3);
    // grouped by video in transcript order
    CHECK(b.comments[0].video_id == "v1");
    CHECK(b.comments[1].video_id == "v1");
    CHECK(b.comments[2].video_id == "v2");
    CHECK(b.comments[0].author_alias != "Ann");
    CHECK(b.transcripts[0].token_count == 2);
    CHECK(b.comments_for("v1").size() == 2);
    CHECK(b.find_transcript("v2")->raw_text == "three");
    CHECK(bundle_from_json(to_json(b)) == b);
}

TEST_CASE("ingest collapses identical duplicates and rejects conflicting ones") {
    test::TempDir d;
    write_persona(d.path());
    test::write(d / "transcripts.jsonl",
                "{\"video_id\":\"v1\",\"raw_text\":\"same\"}\n{\"video_id\":\"v1\",\"raw_text\":\"same\"}\n");
    CHECK(ingest_corpus(d.path(), "p1", tok).transcripts.size() == 1);

    test::write(d / "transcripts.jsonl",
                "{\"video_id\":\"v1\",\"raw_text\":\"same\"}\n{\"video_id\":\"v1\",\"raw_text\":\"other\"}\n");
    CHECK(code_of([&] { ingest_corpus(d.path(), "p1", tok); }) == Errc::DuplicateVideoId);
}

TEST_CASE("ingest gates") {
    test::TempDir d;
    CHECK(code_of([&] { ingest_corpus(d.path(), "p1", tok); }) == Errc::MissingProfile);
    write_persona(d.path(), false);
    test::write(d / "transcripts.jsonl", "{\"video_id\":\"v1\",\"raw_text\":\"x\"}\n");
    CHECK(code_of([&] { ingest_corpus(d.path(), "p1", tok); }) == Errc::UnauthorizedPersona);

    write_persona(d.path());
    test::write(d / "transcripts.jsonl", "{\"video_id\":\"v1\",\"raw_text\":\"x\"}\nnot json\n");
    CHECK(test::message_of([&] { ingest_corpus(d.path(), "p1", tok); }).find("line 2") != std::string::npos);

    test::write(d / "transcripts.jsonl", "{\"video_id\":\"v1\",\"raw_text\":\"x\"}\n");
    test::write(d / "comments.jsonl", "{\"video_id\":\"v9\",\"text\":\"t\",\"author\":\"a\"}\n");
    CHECK(code_of([&] { ingest_corpus(d.path(), "p1", tok); }) == Errc::MalformedRecord);
}

TEST_CASE("written corpus dir re-ingests to the same bundle") {
    test::TempDir d, out;
    const auto fixture = std::filesystem::path(FORGE_FIXTURE_DIR) / "workspace/raw/demo_chef";
    auto b = ingest_corpus(fixture, "demo_chef", tok);
    write_corpus_dir(b, out.path());
    CHECK(ingest_corpus(out.path(), "demo_chef", tok) == b);
    CHECK(canonical_serialize(b) == canonical_serialize(ingest_corpus(fixture, "demo_chef", tok)));
}

TEST_CASE("pseudonyms are stable and never the original name") {
    CHECK(pseudonymize("p", "Ann") == pseudonymize("p", "Ann"));
    CHECK(pseudonymize("p", "Ann") != pseudonymize("q", "Ann"));
    CHECK(pseudonymize("p", "Ann").find("Ann") == std::string::npos);
}

TEST_CASE("correct_transcript") {
    Transcript t{"p1", "v1", "teh cream", std::nullopt, std::nullopt, 2};

    provider::EchoChat echo;
    CHECK(correct_transcript(t, echo, tok).corrected_text == t.raw_text);

    provider::FunctionChat fix([](const provider::ChatRequest& r) {
        std::string s = provider::last_user_content(r);
        for (auto p = s.find("teh"); p != std::string::npos; p = s.find("teh", p)) s.replace(p, 3, "the");
        return s;
    });
    auto fixed = correct_transcript(t, fix, tok);
    CHECK(fixed.corrected_text == "the cream");
    CHECK(fixed.raw_text == "teh cream");

    t.subtitle_text = "the cream";
    std::string seen_system;
    provider::FunctionChat spy([&](const provider::ChatRequest& r) {
        seen_system = r.messages.front().content;
        return provider::last_user_content(r);
    });
    correct_transcript(t, spy, tok);
    CHECK(seen_system.find("the cream") != std::string::npos);

    t.raw_text = "";
    CHECK(code_of([&] { correct_transcript(t, echo, tok); }) == Errc::EmptyTranscript);
}

TEST_CASE("clean_bundle scrubs corrected text and keeps order") {
    CorpusBundle b;
    b.persona = {"p1", "P", "f", "profile", true};
    for (int i = 0; i < 6; ++i)
        b.transcripts.push_back({"p1", "v" + std::to_string(i), "mail x" + std::to_string(i) + "@y.com", {}, {}, 0});
    provider::EchoChat echo;
    auto out = clean_bundle(b, echo, tok, ScrubRuleSet::defaults(), {}, WorkerPool(3));
    for (int i = 0; i < 6; ++i) {
        CHECK(out.transcripts[i].video_id == "v" + std::to_string(i));
        CHECK(*out.transcripts[i].corrected_text == "mail [REDACTED]");
        CHECK(out.transcripts[i].raw_text == b.transcripts[i].raw_text);
    }
}

TEST_CASE("scrub rules") {
    const auto rules = ScrubRuleSet::defaults();
    CHECK(scrub_private("email me at a@b.com", rules) == "email me at [REDACTED]");
    CHECK(scrub_private("call 138-0000-0000 now", rules) == "call [REDACTED] now");
    CHECK(scrub_private("protect your skin barrier", rules) == "protect your skin barrier");
    CHECK(scrub_private("ping @chef_mara today", rules) == "ping [REDACTED] today");
    CHECK(scrub_private("see https://example.com/user/abc123 ok", rules) == "see [REDACTED] ok");
    CHECK(scrub_private("13800000000", rules) == "[REDACTED]");
    CHECK_FALSE(has_private_match("protect your skin barrier", rules));

    const std::string once = scrub_private("a@b.com and 138-0000-0000 and @x_y", rules);
    CHECK(scrub_private(once, rules) == once);
    CHECK_FALSE(has_private_match(once, rules));
}

TEST_CASE("custom scrub rules are validated") {
    auto rules = ScrubRuleSet::defaults();
    CHECK(code_of([&] { rules.add("bad", "("); }) == Errc::ConfigInvalid);
    CHECK(code_of([&] { rules.add("eats_marker", "REDACTED"); }) == Errc::ConfigInvalid);
    rules.add("secret", "hunter2");
    CHECK(scrub_private("pw hunter2", rules) == "pw [REDACTED]");
}
