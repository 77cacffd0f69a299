#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ckgrag/chunker.hpp"
#include "ckgrag/indexer.hpp"
#include "ckgrag/providers.hpp"

namespace ckgrag {

struct BaselineConfig {
    ChunkerConfig chunker;
    std::size_t baseline_k = 5;
};

struct ChunkIndexEntry {
    Chunk chunk;
    Embedding embedding;
};

struct RetrievedChunk {
    std::string doc_id;
    std::uint32_t chunk_index = 0;
    double score = 0.0;
};

struct BaselineAnswer {
    std::string answer_text;
    std::vector<RetrievedChunk> retrieved;
    std::string context;  // rank-ordered chunk concatenation handed to the prompt
};

/// Flat chunk-embedding index for the comparison system: same chunker and
/// embedder as the causal pipeline, plain top-k cosine retrieval.
class BaselineIndex {
public:
    static BaselineIndex build(std::span<const Document> docs, EmbeddingService& embed,
                               const BaselineConfig& cfg);

    /// Exact top-k, ties broken by ascending (doc_id, chunk_index).
    std::vector<std::size_t> top_k(const Embedding& query, std::size_t k) const;

    const std::vector<ChunkIndexEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    /// Persists beside the CKG: baseline_manifest + baseline_chunks records.
    void save(const std::filesystem::path& dir) const;
    static BaselineIndex load(const std::filesystem::path& dir);

private:
    std::vector<ChunkIndexEntry> entries_;
};

BaselineAnswer answer_baseline(const std::string& query, const BaselineIndex& index,
                               EmbeddingService& embed, ChatService& chat,
                               const BaselineConfig& cfg);

}  // namespace ckgrag
