#include "ckgrag/config.hpp"

#include "ckgrag/error.hpp"

namespace ckgrag {

void RunConfig::validate() const {
    eval_weights().validate();
    if (max_chunk_chars == 0) throw Error(ErrorKind::Config, "max_chunk_chars must be positive");
    if (overlap_chars >= max_chunk_chars) {
        throw Error(ErrorKind::Config, "overlap_chars must be smaller than max_chunk_chars");
    }
    if (tau_consolidate < -1.0 || tau_consolidate > 1.0) {
        throw Error(ErrorKind::Config, "tau_consolidate must be a cosine in [-1, 1]");
    }
    if (consolidation_k == 0 || retrieve_k == 0 || baseline_k == 0) {
        throw Error(ErrorKind::Config, "k values must be positive");
    }
    if (d_factual == 0 || d_cf == 0) {
        throw Error(ErrorKind::Config, "traversal depths must be positive");
    }
    if (max_retries < 1) throw Error(ErrorKind::Config, "max_retries must be at least 1");
    provider_mode_from_string(chat_mode);
    provider_mode_from_string(judge_mode);
    embed_mode_from_string(embed_mode);
}

ChunkerConfig RunConfig::chunker_config() const {
    return ChunkerConfig{max_chunk_chars, overlap_chars};
}

IndexConfig RunConfig::index_config() const {
    return IndexConfig{chunker_config(), tau_consolidate, consolidation_k};
}

BaselineConfig RunConfig::baseline_config() const {
    return BaselineConfig{chunker_config(), baseline_k};
}

PipelineConfig RunConfig::pipeline_config() const {
    QueryConfig query{retrieve_k, d_factual};
    return PipelineConfig{query, CounterfactualConfig{d_cf, query}};
}

EvalWeights RunConfig::eval_weights() const { return EvalWeights{w1, w2}; }

nlohmann::json RunConfig::to_json() const {
    return nlohmann::json{{"chat_mode", chat_mode},
                          {"embed_mode", embed_mode},
                          {"judge_mode", judge_mode},
                          {"max_chunk_chars", max_chunk_chars},
                          {"overlap_chars", overlap_chars},
                          {"tau_consolidate", tau_consolidate},
                          {"consolidation_k", consolidation_k},
                          {"retrieve_k", retrieve_k},
                          {"d_factual", d_factual},
                          {"d_cf", d_cf},
                          {"baseline_k", baseline_k},
                          {"w1", w1},
                          {"w2", w2},
                          {"max_retries", max_retries}};
}

}  // namespace ckgrag
