#pragma once

#include <string>

#include "ckgrag/baseline.hpp"
#include "ckgrag/counterfactual.hpp"
#include "ckgrag/eval.hpp"
#include "ckgrag/synthesis.hpp"

namespace ckgrag {

struct PipelineConfig {
    QueryConfig query;
    CounterfactualConfig counterfactual;
};

/// Full causal path: parse -> two-stage retrieval -> counterfactual probes ->
/// evidence package -> synthesized answer.
FinalAnswer answer_causal_query(const std::string& query, const CausalGraph& graph,
                                EmbeddingService& embed, ChatService& chat,
                                const PipelineConfig& cfg);

/// Causal pipeline as an evaluation system. Retrieved documents are the
/// doc_ids of the sources cited in the final answer.
class CausalRagSystem final : public AnswerSystem {
public:
    CausalRagSystem(const CausalGraph* graph, EmbeddingService* embed, ChatService* chat,
                    PipelineConfig cfg)
        : graph_(graph), embed_(embed), chat_(chat), cfg_(std::move(cfg)) {}

    std::string name() const override { return "causal"; }
    AnswerOutput answer(const EvalQuestion& question) override;

private:
    const CausalGraph* graph_;
    EmbeddingService* embed_;
    ChatService* chat_;
    PipelineConfig cfg_;
};

/// Regular RAG comparison system. Retrieved documents are the doc_ids of the
/// top-k chunks handed to the answer prompt.
class BaselineRagSystem final : public AnswerSystem {
public:
    BaselineRagSystem(const BaselineIndex* index, EmbeddingService* embed, ChatService* chat,
                      BaselineConfig cfg)
        : index_(index), embed_(embed), chat_(chat), cfg_(std::move(cfg)) {}

    std::string name() const override { return "baseline"; }
    AnswerOutput answer(const EvalQuestion& question) override;

private:
    const BaselineIndex* index_;
    EmbeddingService* embed_;
    ChatService* chat_;
    BaselineConfig cfg_;
};

}  // namespace ckgrag
