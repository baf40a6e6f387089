#include "retrieval/index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/errors.hpp"

namespace forge::retrieval {

KnowledgeIndex::KnowledgeIndex(std::string persona_id, std::size_t dimension, std::string tokenizer_tag,
                               std::vector<Chunk> chunks, std::vector<IndexEntry> entries)
    : persona_id_(std::move(persona_id)),
      dimension_(dimension),
      tokenizer_tag_(std::move(tokenizer_tag)),
      chunks_(std::move(chunks)),
      entries_(std::move(entries)) {
    require(chunks_.size() == entries_.size(), Errc::MalformedRecord, "index entries do not match chunks");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        require(entries_[i].chunk_id == chunks_[i].chunk_id && chunks_[i].chunk_id == i, Errc::MalformedRecord,
                "index entry " + std::to_string(i) + " is out of chunk order");
        require(entries_[i].vector.dimension() == dimension_, Errc::DimensionMismatch,
                "entry " + std::to_string(i) + " has dimension " + std::to_string(entries_[i].vector.dimension()) +
                    ", index has " + std::to_string(dimension_));
    }
}

Json KnowledgeIndex::to_json() const {
    Json chunks = Json::array();
    for (const auto& c : chunks_) chunks.push_back(retrieval::to_json(c));
    Json entries = Json::array();
    for (const auto& e : entries_) entries.push_back({{"chunk_id", e.chunk_id}, {"vector", e.vector.values}});
    return {{"persona_id", persona_id_}, {"dimension", dimension_}, {"tokenizer_tag", tokenizer_tag_},
            {"chunks", std::move(chunks)}, {"entries", std::move(entries)}};
}

KnowledgeIndex KnowledgeIndex::from_json(const Json& j) {
    try {
        std::vector<Chunk> chunks;
        for (const auto& c : j.at("chunks")) chunks.push_back(chunk_from_json(c));
        std::vector<IndexEntry> entries;
        for (const auto& e : j.at("entries"))
            entries.push_back({e.at("chunk_id").get<std::size_t>(), {e.at("vector").get<std::vector<double>>()}});
        return KnowledgeIndex(j.at("persona_id").get<std::string>(), j.at("dimension").get<std::size_t>(),
                              j.at("tokenizer_tag").get<std::string>(), std::move(chunks), std::move(entries));
    } catch (const Json::exception& e) {
        fail(Errc::MalformedRecord, std::string("index: ") + e.what());
    }
}

void KnowledgeIndex::save(const std::filesystem::path& path) const {
    write_file_atomic(path, canonical_dump(to_json()) + "\n");
}

KnowledgeIndex KnowledgeIndex::load(const std::filesystem::path& path, const TokenizerPort& tokenizer) {
    auto parsed = Json::parse(read_text_file(path), nullptr, false);
    require(!parsed.is_discarded(), Errc::MalformedRecord, path.string() + " is not valid JSON");
    auto index = from_json(parsed);
    require(index.tokenizer_tag() == tokenizer.tag(), Errc::TokenizerMismatch,
            "index built with '" + index.tokenizer_tag() + "', configured tokenizer is '" + tokenizer.tag() + "'");
    return index;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    require(a.dimension() == b.dimension(), Errc::DimensionMismatch, "cosine of vectors with different dimensions");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

KnowledgeIndex build_index(const std::string& persona_id, std::vector<Chunk> chunks, provider::EmbedPort& embedder,
                           const TokenizerPort& tokenizer, const WorkerPool& pool, std::size_t batch_size) {
    require(!chunks.empty(), Errc::EmptyIndex, "no chunks to index");
    batch_size = std::max<std::size_t>(1, batch_size);
    const std::size_t batches = (chunks.size() + batch_size - 1) / batch_size;
    auto vectors = pool.map<std::vector<EmbeddingVector>>(batches, [&](std::size_t b) {
        std::vector<std::string> texts;
        for (std::size_t i = b * batch_size; i < std::min(chunks.size(), (b + 1) * batch_size); ++i)
            texts.push_back(chunks[i].text);
        return embedder.embed(texts);
    });
    const std::size_t dim = embedder.dimension();
    std::vector<IndexEntry> entries;
    entries.reserve(chunks.size());
    for (auto& batch : vectors) {
        for (auto& v : batch) {
            require(v.dimension() == dim, Errc::DimensionMismatch,
                    "chunk " + std::to_string(entries.size()) + " embedded with dimension " +
                        std::to_string(v.dimension()) + ", expected " + std::to_string(dim));
            entries.push_back({entries.size(), std::move(v)});
        }
    }
    require(entries.size() == chunks.size(), Errc::ProviderFailure, "embedder returned the wrong number of vectors");
    return KnowledgeIndex(persona_id, dim, tokenizer.tag(), std::move(chunks), std::move(entries));
}

std::vector<ScoredChunk> search(const KnowledgeIndex& index, const std::string& query, std::size_t k,
                                provider::EmbedPort& embedder) {
    require(index.size() > 0, Errc::EmptyIndex, "index is empty");
    require(k >= 1, Errc::InvalidRequest, "k must be >= 1");
    const auto q = embedder.embed({query});
    require(q.size() == 1, Errc::ProviderFailure, "embedder returned no query vector");
    require(q[0].dimension() == index.dimension(), Errc::DimensionMismatch,
            "query dimension " + std::to_string(q[0].dimension()) + " differs from index dimension " +
                std::to_string(index.dimension()));

    std::vector<double> scores(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) scores[i] = cosine(q[0], index.entries()[i].vector);
    std::vector<std::size_t> order(index.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; });
    std::vector<ScoredChunk> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back({index.chunks()[order[i]], scores[order[i]]});
    return out;
}

}  // namespace forge::retrieval
