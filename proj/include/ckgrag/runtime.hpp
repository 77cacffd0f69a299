#pragma once

#include <memory>
#include <string>

#include "ckgrag/config.hpp"

namespace ckgrag {

/// Provider stack assembled from a RunConfig: prompt registry, transcript
/// store, transports, and the chat/judge/embedding services. Used by the CLI
/// and the Python bindings.
struct RuntimeServices {
    PromptRegistry prompts;
    TranscriptStore transcript;
    std::unique_ptr<ChatTransport> chat_transport;
    std::unique_ptr<ChatTransport> judge_transport;
    std::unique_ptr<EmbedTransport> embed_transport;
    std::unique_ptr<ChatService> chat;
    std::unique_ptr<ChatService> judge;
    std::unique_ptr<EmbeddingService> embed;
    std::string transcript_sha256;
};

RuntimeServices make_services(const RunConfig& cfg);

/// Ingests the corpus into the graph directory (loading any existing graph
/// first) and rebuilds the baseline index beside it.
IndexStats run_index(const RunConfig& cfg);

/// Answers one causal query against the stored graph.
FinalAnswer run_query(const RunConfig& cfg, const std::string& query);

/// Evaluates the causal pipeline against the baseline over the dataset.
MetricsReport run_eval_protocol(const RunConfig& cfg);

}  // namespace ckgrag
