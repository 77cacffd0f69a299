#include "ckgrag/runtime.hpp"

#include <array>
#include <filesystem>

#include "ckgrag/error.hpp"

namespace ckgrag {

RuntimeServices make_services(const RunConfig& cfg) {
    RuntimeServices s;
    s.prompts = PromptRegistry::load(cfg.prompts_dir);

    ProviderMode chat_mode = provider_mode_from_string(cfg.chat_mode);
    ProviderMode judge_mode = provider_mode_from_string(cfg.judge_mode);
    EmbedMode embed_mode = embed_mode_from_string(cfg.embed_mode);

    bool needs_replay = chat_mode == ProviderMode::Replay ||
                        judge_mode == ProviderMode::Replay ||
                        embed_mode == EmbedMode::Replay;
    bool needs_sink = chat_mode == ProviderMode::Record ||
                      judge_mode == ProviderMode::Record || embed_mode == EmbedMode::Record;
    if ((needs_replay || needs_sink) && cfg.transcripts.empty()) {
        throw Error(ErrorKind::Config, "record/replay modes require a transcripts path");
    }
    if (!cfg.transcripts.empty()) {
        s.transcript = TranscriptStore::open(cfg.transcripts, needs_replay);
        if (needs_sink) s.transcript.attach_sink(cfg.transcripts);
        if (std::filesystem::exists(cfg.transcripts)) {
            s.transcript_sha256 = file_sha256(cfg.transcripts);
        }
    }

    if (chat_mode != ProviderMode::Replay) {
        s.chat_transport = std::make_unique<HttpChatTransport>(provider_endpoint_from_env());
    }
    if (judge_mode != ProviderMode::Replay) {
        s.judge_transport = std::make_unique<HttpChatTransport>(judge_endpoint_from_env());
    }
    if (embed_mode == EmbedMode::Live || embed_mode == EmbedMode::Record) {
        s.embed_transport = std::make_unique<HttpEmbedTransport>(provider_endpoint_from_env());
    }

    s.chat = std::make_unique<ChatService>(&s.prompts, chat_mode, &s.transcript,
                                           s.chat_transport.get(), cfg.max_retries);
    s.judge = std::make_unique<ChatService>(&s.prompts, judge_mode, &s.transcript,
                                            s.judge_transport.get(), cfg.max_retries);
    s.embed = std::make_unique<EmbeddingService>(embed_mode, &s.transcript,
                                                 s.embed_transport.get());
    return s;
}

IndexStats run_index(const RunConfig& cfg) {
    if (cfg.corpus.empty()) throw Error(ErrorKind::Config, "corpus path is required");
    if (cfg.graph_dir.empty()) throw Error(ErrorKind::Config, "graph directory is required");
    RuntimeServices services = make_services(cfg);
    auto docs = load_corpus(cfg.corpus);

    CausalGraph graph;
    if (std::filesystem::exists(std::filesystem::path(cfg.graph_dir) / "manifest")) {
        graph = CausalGraph::load(cfg.graph_dir);
    }
    IndexStats stats =
        index_corpus(docs, graph, *services.embed, *services.chat, cfg.index_config());
    BaselineIndex baseline = BaselineIndex::build(docs, *services.embed, cfg.baseline_config());
    graph.save(cfg.graph_dir);
    baseline.save(cfg.graph_dir);
    return stats;
}

FinalAnswer run_query(const RunConfig& cfg, const std::string& query) {
    if (cfg.graph_dir.empty()) throw Error(ErrorKind::Config, "graph directory is required");
    RuntimeServices services = make_services(cfg);
    CausalGraph graph = CausalGraph::load(cfg.graph_dir);
    return answer_causal_query(query, graph, *services.embed, *services.chat,
                               cfg.pipeline_config());
}

MetricsReport run_eval_protocol(const RunConfig& cfg) {
    if (cfg.dataset.empty()) throw Error(ErrorKind::Config, "dataset path is required");
    if (cfg.graph_dir.empty()) throw Error(ErrorKind::Config, "graph directory is required");
    RuntimeServices services = make_services(cfg);
    auto dataset = load_dataset(cfg.dataset);

    CausalGraph graph = CausalGraph::load(cfg.graph_dir);
    BaselineIndex baseline = BaselineIndex::load(cfg.graph_dir);

    std::set<std::string> corpus_docs;
    for (const ChunkIndexEntry& entry : baseline.entries()) {
        corpus_docs.insert(entry.chunk.doc_id);
    }
    for (const EvalQuestion& q : dataset) {
        for (const std::string& doc : q.relevant_doc_ids) {
            if (!corpus_docs.count(doc)) {
                throw Error(ErrorKind::CorruptFile,
                            "question " + q.id + " references unknown document " + doc);
            }
        }
    }

    CausalRagSystem causal(&graph, services.embed.get(), services.chat.get(),
                           cfg.pipeline_config());
    BaselineRagSystem regular(&baseline, services.embed.get(), services.chat.get(),
                              cfg.baseline_config());
    std::array<AnswerSystem*, 2> systems{&causal, &regular};

    return run_eval(dataset, systems, *services.embed, *services.judge, cfg.eval_weights(),
                    cfg.to_json(), services.transcript_sha256);
}

}  // namespace ckgrag
