#include "ckgrag/indexer.hpp"

#include <algorithm>
#include <sstream>

#include "ckgrag/error.hpp"
#include "ckgrag/text.hpp"

namespace ckgrag {

using json = nlohmann::json;

json IndexStats::to_json() const {
    json failures_json = json::array();
    for (const ChunkFailure& f : failures) {
        failures_json.push_back(
            {{"doc_id", f.doc_id}, {"chunk_index", f.chunk_index}, {"error", f.error}});
    }
    return json{{"docs", docs},
                {"chunks", chunks},
                {"pairs", pairs},
                {"nodes_created", nodes_created},
                {"nodes_reused", nodes_reused},
                {"edges_added", edges_added},
                {"edges_duplicate", edges_duplicate},
                {"failures", failures_json}};
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
    std::vector<Document> docs;
    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(path)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            docs.push_back(Document{file.filename().string(), read_file(file.string())});
        }
    } else if (std::filesystem::is_regular_file(path)) {
        std::string content = read_file(path.string());
        std::istringstream in(content);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json record;
            try {
                record = json::parse(line);
            } catch (const json::exception& e) {
                throw Error(ErrorKind::CorruptFile, "corpus line " + std::to_string(line_no) +
                                                        " is not valid JSON: " + e.what());
            }
            docs.push_back(Document{record.at("doc_id").get<std::string>(),
                                    record.at("text").get<std::string>()});
        }
    } else {
        throw Error(ErrorKind::Io, "corpus path does not exist: " + path.string());
    }
    if (docs.empty()) {
        throw Error(ErrorKind::EmptyInput, "corpus is empty: " + path.string());
    }
    return docs;
}

std::vector<std::pair<EventDraft, EventDraft>> extract_pairs(const Chunk& chunk,
                                                             ChatService& chat) {
    json response = chat.chat(PromptKind::ExtractPairs, json{{"chunk_text", chunk.text}});
    SourceRef source{chunk.doc_id, chunk.chunk_index, chunk.char_start, chunk.char_end,
                     chunk.text};
    std::vector<std::pair<EventDraft, EventDraft>> pairs;
    for (const json& pair : response.at("pairs")) {
        auto draft = [&](const json& side) {
            return EventDraft{side.at("text").get<std::string>(),
                              polarity_from_string(side.at("polarity").get<std::string>()),
                              source};
        };
        pairs.emplace_back(draft(pair.at("cause")), draft(pair.at("effect")));
    }
    return pairs;
}

ConsolidationOutcome consolidate(const EventDraft& draft, CausalGraph& graph,
                                 EmbeddingService& embed, ChatService& chat,
                                 const IndexConfig& cfg) {
    ConsolidationOutcome outcome;
    Embedding draft_embedding = embed.embed_one(draft.text);

    auto hits = graph.vector_search(draft_embedding, cfg.consolidation_k);
    std::vector<SearchHit> survivors;
    for (const SearchHit& hit : hits) {
        if (hit.score >= cfg.tau_consolidate) survivors.push_back(hit);
    }

    std::string reused_id;
    for (const SearchHit& hit : survivors) {
        if (!reused_id.empty()) {
            outcome.candidates_considered.push_back(
                CandidateAudit{hit.node_id, hit.score, VerifierVerdict::Skipped});
            continue;
        }
        EventNode candidate = *graph.node(hit.node_id);
        json verdict = chat.chat(PromptKind::VerifyEquivalence,
                                 json{{"event_text", draft.text},
                                      {"event_polarity", to_string(draft.polarity)},
                                      {"candidate_text", candidate.text},
                                      {"candidate_polarity", to_string(candidate.polarity)}});
        bool equivalent = verdict.at("same_event").get<bool>() &&
                          verdict.at("same_polarity").get<bool>();
        outcome.candidates_considered.push_back(CandidateAudit{
            hit.node_id, hit.score, equivalent ? VerifierVerdict::Yes : VerifierVerdict::No});
        if (equivalent) reused_id = hit.node_id;
    }

    if (!reused_id.empty()) {
        graph.add_source(reused_id, draft.source);
        outcome.node_id = reused_id;
        outcome.decision = ConsolidationDecision::ReusedExisting;
    } else {
        outcome.node_id = graph.add_node(draft.text, draft_embedding, draft.polarity,
                                         draft.source);
        outcome.decision = ConsolidationDecision::CreatedNew;
    }
    return outcome;
}

IndexStats index_corpus(std::span<const Document> docs, CausalGraph& graph,
                        EmbeddingService& embed, ChatService& chat, const IndexConfig& cfg) {
    if (docs.empty()) {
        throw Error(ErrorKind::EmptyInput, "index_corpus requires at least one document");
    }
    IndexStats stats;
    stats.docs = docs.size();
    for (const Document& doc : docs) {
        std::vector<Chunk> chunks;
        try {
            chunks = chunk_document(doc.doc_id, doc.text, cfg.chunker);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::ProviderUnavailable) throw;
            stats.failures.push_back(ChunkFailure{doc.doc_id, 0, e.what()});
            continue;
        }
        for (const Chunk& chunk : chunks) {
            ++stats.chunks;
            try {
                auto pairs = extract_pairs(chunk, chat);
                for (const auto& [cause, effect] : pairs) {
                    ++stats.pairs;
                    auto cause_outcome = consolidate(cause, graph, embed, chat, cfg);
                    auto effect_outcome = consolidate(effect, graph, embed, chat, cfg);
                    for (const auto& outcome : {cause_outcome, effect_outcome}) {
                        if (outcome.decision == ConsolidationDecision::CreatedNew) {
                            ++stats.nodes_created;
                        } else {
                            ++stats.nodes_reused;
                        }
                    }
                    if (cause_outcome.node_id == effect_outcome.node_id) {
                        stats.failures.push_back(ChunkFailure{
                            chunk.doc_id, chunk.chunk_index,
                            "pair collapsed to a single node (self-loop skipped): " +
                                cause.text});
                        continue;
                    }
                    if (graph.add_edge(cause_outcome.node_id, effect_outcome.node_id,
                                       cause.source)) {
                        ++stats.edges_added;
                    } else {
                        ++stats.edges_duplicate;
                    }
                }
            } catch (const Error& e) {
                // A transcript miss or unreachable provider poisons every
                // remaining chunk; surface it instead of degrading.
                if (e.kind() == ErrorKind::ProviderUnavailable) throw;
                stats.failures.push_back(
                    ChunkFailure{chunk.doc_id, chunk.chunk_index, e.what()});
            }
        }
    }
    return stats;
}

}  // namespace ckgrag
