#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ckgrag/chunker.hpp"
#include "ckgrag/providers.hpp"
#include "ckgrag/store.hpp"

namespace ckgrag {

struct IndexConfig {
    ChunkerConfig chunker;
    double tau_consolidate = 0.85;
    std::size_t consolidation_k = 5;
};

struct Document {
    std::string doc_id;
    std::string text;
};

/// An extracted event before consolidation against the graph.
struct EventDraft {
    std::string text;
    Polarity polarity = Polarity::Neutral;
    SourceRef source;
};

enum class ConsolidationDecision { ReusedExisting, CreatedNew };
enum class VerifierVerdict { Yes, No, Skipped };

struct CandidateAudit {
    std::string node_id;
    double score = 0.0;
    VerifierVerdict verdict = VerifierVerdict::Skipped;
};

struct ConsolidationOutcome {
    std::string node_id;
    ConsolidationDecision decision = ConsolidationDecision::CreatedNew;
    std::vector<CandidateAudit> candidates_considered;
};

struct ChunkFailure {
    std::string doc_id;
    std::uint32_t chunk_index = 0;
    std::string error;
};

struct IndexStats {
    std::size_t docs = 0;
    std::size_t chunks = 0;
    std::size_t pairs = 0;
    std::size_t nodes_created = 0;
    std::size_t nodes_reused = 0;
    std::size_t edges_added = 0;
    std::size_t edges_duplicate = 0;
    std::vector<ChunkFailure> failures;

    nlohmann::json to_json() const;
};

/// Corpus loading: a directory of UTF-8 .txt files (doc_id = filename, sorted)
/// or a JSONL file with {doc_id, text} records (input order).
std::vector<Document> load_corpus(const std::filesystem::path& path);

std::vector<std::pair<EventDraft, EventDraft>> extract_pairs(const Chunk& chunk,
                                                             ChatService& chat);

/// Two-stage consolidation: cosine candidates above tau, then verifier
/// equivalence-and-polarity checks in rank order. First pass reuses that
/// node; no pass creates a new one.
ConsolidationOutcome consolidate(const EventDraft& draft, CausalGraph& graph,
                                 EmbeddingService& embed, ChatService& chat,
                                 const IndexConfig& cfg);

/// Full ingestion: chunk, extract, consolidate, link. A failing chunk skips
/// only itself and is recorded in the stats.
IndexStats index_corpus(std::span<const Document> docs, CausalGraph& graph,
                        EmbeddingService& embed, ChatService& chat, const IndexConfig& cfg);

}  // namespace ckgrag
