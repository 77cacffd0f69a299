#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "ckgrag/eval.hpp"
#include "ckgrag/indexer.hpp"
#include "ckgrag/pipeline.hpp"

namespace ckgrag {

/// Every tunable and path the CLI and bindings accept, with the documented
/// defaults. Serialized into evaluation reports for provenance.
struct RunConfig {
    // Paths
    std::string corpus;
    std::string graph_dir;
    std::string transcripts;
    std::string dataset;
    std::string report;
    std::string prompts_dir = "prompts";

    // Provider modes per role
    std::string chat_mode = "replay";
    std::string embed_mode = "mock";
    std::string judge_mode = "replay";

    // Tunables
    std::size_t max_chunk_chars = 1200;
    std::size_t overlap_chars = 200;
    double tau_consolidate = 0.85;
    std::size_t consolidation_k = 5;
    std::size_t retrieve_k = 5;
    std::size_t d_factual = 3;
    std::size_t d_cf = 3;
    std::size_t baseline_k = 5;
    double w1 = 0.5;
    double w2 = 0.5;
    int max_retries = 3;

    void validate() const;

    ChunkerConfig chunker_config() const;
    IndexConfig index_config() const;
    BaselineConfig baseline_config() const;
    PipelineConfig pipeline_config() const;
    EvalWeights eval_weights() const;

    nlohmann::json to_json() const;
};

}  // namespace ckgrag
