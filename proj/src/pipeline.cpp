#include "ckgrag/pipeline.hpp"

namespace ckgrag {

FinalAnswer answer_causal_query(const std::string& query, const CausalGraph& graph,
                                EmbeddingService& embed, ChatService& chat,
                                const PipelineConfig& cfg) {
    ParsedQuery parsed = parse_query(query, chat);
    FactualContext factual = retrieve_factual(parsed, graph, embed, chat, cfg.query);
    auto probes = probe_all(factual, graph, embed, chat, cfg.counterfactual);
    EvidencePackage package = build_package(parsed, factual, std::move(probes));
    return synthesize_answer(package, graph, chat);
}

AnswerOutput CausalRagSystem::answer(const EvalQuestion& question) {
    ParsedQuery parsed = parse_query(question.question, *chat_);
    FactualContext factual = retrieve_factual(parsed, *graph_, *embed_, *chat_, cfg_.query);
    auto probes = probe_all(factual, *graph_, *embed_, *chat_, cfg_.counterfactual);
    EvidencePackage package = build_package(parsed, factual, std::move(probes));
    FinalAnswer final_answer = synthesize_answer(package, *graph_, *chat_);

    AnswerOutput output;
    output.text = final_answer.answer_text;
    for (const SourceRef& source : final_answer.citations) {
        output.retrieved_doc_ids.insert(source.doc_id);
    }
    output.context = render_package(package, *graph_);
    return output;
}

AnswerOutput BaselineRagSystem::answer(const EvalQuestion& question) {
    BaselineAnswer baseline = answer_baseline(question.question, *index_, *embed_, *chat_, cfg_);
    AnswerOutput output;
    output.text = baseline.answer_text;
    for (const RetrievedChunk& chunk : baseline.retrieved) {
        output.retrieved_doc_ids.insert(chunk.doc_id);
    }
    output.context = baseline.context;
    return output;
}

}  // namespace ckgrag
