#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "common/worker_pool.hpp"
#include "provider/chat.hpp"
#include "retrieval/chunker.hpp"

namespace forge::retrieval {

using provider::EmbeddingVector;

struct IndexEntry {
    std::size_t chunk_id = 0;
    EmbeddingVector vector;

    bool operator==(const IndexEntry&) const = default;
};

struct ScoredChunk {
    Chunk chunk;
    double score = 0.0;  // cosine similarity
};

// Embedded chunks of one persona. Built once, then read-only; concurrent
// searches need no locking.
class KnowledgeIndex {
public:
    KnowledgeIndex(std::string persona_id, std::size_t dimension, std::string tokenizer_tag,
                   std::vector<Chunk> chunks, std::vector<IndexEntry> entries);

    const std::string& persona_id() const noexcept { return persona_id_; }
    std::size_t dimension() const noexcept { return dimension_; }
    const std::string& tokenizer_tag() const noexcept { return tokenizer_tag_; }
    const std::vector<Chunk>& chunks() const noexcept { return chunks_; }
    const std::vector<IndexEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    Json to_json() const;
    static KnowledgeIndex from_json(const Json& j);

    void save(const std::filesystem::path& path) const;
    // Fails with TokenizerMismatch when the index was built under another tokenizer.
    static KnowledgeIndex load(const std::filesystem::path& path, const TokenizerPort& tokenizer);

    bool operator==(const KnowledgeIndex&) const = default;

private:
    std::string persona_id_;
    std::size_t dimension_;
    std::string tokenizer_tag_;
    std::vector<Chunk> chunks_;
    std::vector<IndexEntry> entries_;
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

KnowledgeIndex build_index(const std::string& persona_id, std::vector<Chunk> chunks, provider::EmbedPort& embedder,
                           const TokenizerPort& tokenizer, const WorkerPool& pool = WorkerPool{},
                           std::size_t batch_size = 32);

// Top min(k, |index|) chunks by cosine similarity, highest first; equal
// scores are ordered by ascending chunk_id.
std::vector<ScoredChunk> search(const KnowledgeIndex& index, const std::string& query, std::size_t k,
                                provider::EmbedPort& embedder);

}  // namespace forge::retrieval
