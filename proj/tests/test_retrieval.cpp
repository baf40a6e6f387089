#include <doctest.h>

#include <cmath>
#include <random>

#include "provider/mocks.hpp"
#include "retrieval/chunker.hpp"
#include "retrieval/index.hpp"
#include "retrieval/tokenizer.hpp"
#include "support.hpp"

using namespace forge;
using namespace forge::retrieval;
using forge::test::code_of;

namespace {

const DefaultTokenizer tok;

// n sentences of ten tokens each: nine words and a period.
std::string ten_token_sentences(std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += "one two three four five six seven eight nine.\n";
    return s;
}

std::vector<Chunk> three_chunks() {
    return chunk_text("p", {{"v1", "Salt early."}, {"v2", "Rest the meat."}, {"v3", "Dry the pan."}}, tok);
}

// Embeds via a lookup table so tests control every vector.
class TableEmbedder final : public provider::EmbedPort {
public:
    std::map<std::string, provider::EmbeddingVector> table;
    std::size_t dim = 0;
    std::string name() const override { return "table"; }
    std::size_t dimension() const override { return dim; }
    std::vector<provider::EmbeddingVector> embed(const std::vector<std::string>& texts) override {
        std::vector<provider::EmbeddingVector> out;
        for (const auto& t : texts) out.push_back(table.at(t));
        return out;
    }
};

class SkewedEmbedder final : public provider::EmbedPort {
public:
    std::string name() const override { return "skewed"; }
    std::size_t dimension() const override { return 4; }
    std::vector<provider::EmbeddingVector> embed(const std::vector<std::string>& texts) override {
        std::vector<provider::EmbeddingVector> out;
        for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({std::vector<double>(i == 1 ? 3 : 4, 1.0)});
        return out;
    }
};

}  // namespace

TEST_CASE("default tokenizer") {
    CHECK(tok.count("Hello, world!") == 4);
    CHECK(tok.count("abc123 def") == 3);
    CHECK(tok.count("   ") == 0);
    CHECK(tok.count("\xE4\xBD\xA0\xE5\xA5\xBD") == 2);  // two ideographs
    auto spans = tok.tokenize("ab  cd");
    REQUIRE(spans.size() == 2);
    CHECK(spans[1].begin == 4);
    CHECK(spans[1].end == 6);
}

TEST_CASE("sentences tile the text") {
    const std::string text = "One. Two?! Three\nFour... 3.5 stays";
    auto ranges = split_sentences(text);
    std::string rebuilt;
    std::size_t expect = 0;
    for (auto [b, e] : ranges) {
        CHECK(b == expect);
        rebuilt += text.substr(b, e - b);
        expect = e;
    }
    CHECK(rebuilt == text);
    CHECK(ranges.size() == 5);
}

TEST_CASE("1200 tokens make three chunks") {
    const auto text = ten_token_sentences(120);
    REQUIRE(tok.count(text) == 1200);
    auto chunks = chunk_text("p", {{"v", text}}, tok);
    REQUIRE(chunks.size() == 3);
    std::size_t sum = 0;
    for (const auto& c : chunks) {
        CHECK(c.token_count <= 500);
        CHECK(tok.count(c.text) == c.token_count);
        sum += c.token_count;
    }
    CHECK(sum == 1200);
}

TEST_CASE("chunker small and empty corpora") {
    auto one = chunk_text("p", {{"v", "one two three four five six seven eight nine ten"}}, tok);
    CHECK(one.size() == 1);
    CHECK(code_of([] { chunk_text("p", {}, tok); }) == Errc::EmptyCorpus);
    CHECK(code_of([] { chunk_text("p", {{"v", "  \n "}}, tok); }) == Errc::EmptyCorpus);
}

TEST_CASE("oversized sentences are cut at token boundaries") {
    std::string words;
    for (int i = 0; i < 1234; ++i) words += "w" + std::to_string(i) + " ";
    auto chunks = chunk_text("p", {{"v", "Short intro. " + words + "end."}}, tok, 500);
    std::string joined;
    for (const auto& c : chunks) {
        CHECK(c.token_count <= 500);
        CHECK(tok.count(c.text) == c.token_count);
        joined += c.text;
    }
    CHECK(joined == "Short intro. " + words + "end.");
}

TEST_CASE("chunks record byte ranges and never cross videos") {
    auto chunks = chunk_text("p", {{"a", "First video.\r\nSecond line."}, {"b", "Other video."}}, tok, 3);
    for (const auto& c : chunks) {
        const std::string src = c.video_id == "a" ? "First video.\nSecond line." : "Other video.";
        CHECK(src.substr(c.begin, c.end - c.begin) == c.text);
    }
    for (std::size_t i = 0; i < chunks.size(); ++i) CHECK(chunks[i].chunk_id == i);
    CHECK(chunk_from_json(to_json(chunks[0])) == chunks[0]);
}

TEST_CASE("index shape, determinism and faults") {
    provider::HashEmbedder e(64);
    auto idx = build_index("p", three_chunks(), e, tok);
    CHECK(idx.size() == 3);
    CHECK(idx.dimension() == 64);
    auto again = build_index("p", three_chunks(), e, tok, WorkerPool(2), 1);
    CHECK(canonical_dump(idx.to_json()) == canonical_dump(again.to_json()));

    SkewedEmbedder skew;
    CHECK(code_of([&] { build_index("p", three_chunks(), skew, tok); }) == Errc::DimensionMismatch);
    CHECK(code_of([&] { build_index("p", {}, e, tok); }) == Errc::EmptyIndex);
}

TEST_CASE("index save and load") {
    test::TempDir d;
    provider::HashEmbedder e(16);
    auto idx = build_index("p", three_chunks(), e, tok);
    idx.save(d / "index.json");
    CHECK(KnowledgeIndex::load(d / "index.json", tok) == idx);

    class OtherTokenizer final : public TokenizerPort {
    public:
        std::string tag() const override { return "other"; }
        std::vector<TokenSpan> tokenize(std::string_view) const override { return {}; }
    } other;
    CHECK(code_of([&] { KnowledgeIndex::load(d / "index.json", other); }) == Errc::TokenizerMismatch);
}

TEST_CASE("search basics") {
    provider::HashEmbedder e(64);
    auto chunks = three_chunks();
    auto idx = build_index("p", chunks, e, tok);
    auto hits = search(idx, chunks[2].text, 1, e);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].chunk.chunk_id == 2);
    CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-9));

    auto all = search(idx, "meat", 10, e);
    REQUIRE(all.size() == 3);
    CHECK(all[0].score >= all[1].score);
    CHECK(all[1].score >= all[2].score);
    CHECK(code_of([&] { search(idx, "x", 0, e); }) == Errc::InvalidRequest);
}

TEST_CASE("search ties break toward the lower chunk id") {
    TableEmbedder e;
    e.dim = 2;
    std::vector<Chunk> chunks;
    for (std::size_t i = 0; i < 4; ++i) {
        chunks.push_back({"p", i, "c" + std::to_string(i), 1, "v", 0, 2});
        e.table["c" + std::to_string(i)] = {{i % 2 ? 0.0 : 1.0, i % 2 ? 1.0 : 0.0}};
    }
    e.table["q"] = {{1.0, 0.0}};
    auto idx = build_index("p", chunks, e, tok);
    auto hits = search(idx, "q", 2, e);
    CHECK(hits[0].chunk.chunk_id == 0);
    CHECK(hits[1].chunk.chunk_id == 2);
}

TEST_CASE("top-1 matches an exhaustive scan on random indexes") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    TableEmbedder e;
    e.dim = 8;
    std::vector<Chunk> chunks;
    std::vector<std::vector<double>> raw;
    for (std::size_t i = 0; i < 50; ++i) {
        std::vector<double> v(8);
        for (auto& x : v) x = g(rng);
        raw.push_back(v);
        chunks.push_back({"p", i, "chunk-" + std::to_string(i), 1, "v", 0, 7});
        e.table["chunk-" + std::to_string(i)] = {v};
    }
    auto idx = build_index("p", chunks, e, tok);
    for (int q = 0; q < 100; ++q) {
        std::vector<double> qv(8);
        for (auto& x : qv) x = g(rng);
        e.table["query"] = {qv};
        std::size_t best = 0;
        double best_score = -2;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            double dot = 0, na = 0, nb = 0;
            for (std::size_t d = 0; d < 8; ++d) {
                dot += qv[d] * raw[i][d];
                na += qv[d] * qv[d];
                nb += raw[i][d] * raw[i][d];
            }
            const double s = dot / (std::sqrt(na) * std::sqrt(nb));
            if (s > best_score) {
                best_score = s;
                best = i;
            }
        }
        auto hits = search(idx, "query", 1, e);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].chunk.chunk_id == best);
    }
}
