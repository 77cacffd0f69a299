#include "ckgrag/query.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ckgrag/error.hpp"

namespace ckgrag {

using json = nlohmann::json;

ParsedQuery parse_query(const std::string& text, ChatService& chat) {
    if (text.empty()) throw Error(ErrorKind::EmptyInput, "query is empty");
    json response = chat.chat(PromptKind::ParseQuery, json{{"query", text}});
    ParsedQuery parsed;
    parsed.evidences = response.at("evidences").get<std::vector<std::string>>();
    parsed.interventions = response.at("interventions").get<std::vector<std::string>>();
    parsed.query_variable = response.at("query_variable").get<std::string>();
    parsed.main_event = response.at("main_event").get<std::string>();
    parsed.raw_query = text;
    return parsed;
}

ResolvedEvent resolve_event(const std::string& event_text, const CausalGraph& graph,
                            EmbeddingService& embed, ChatService& chat,
                            const QueryConfig& cfg) {
    ResolvedEvent resolved;
    resolved.query_text = event_text;
    if (graph.node_count() == 0) return resolved;

    Embedding query_embedding = embed.embed_one(event_text);
    auto hits = graph.vector_search(query_embedding, cfg.retrieve_k);
    for (const SearchHit& hit : hits) {
        EventNode candidate = *graph.node(hit.node_id);
        json verdict = chat.chat(PromptKind::VerifyEquivalence,
                                 json{{"event_text", event_text},
                                      {"event_polarity", "unspecified"},
                                      {"candidate_text", candidate.text},
                                      {"candidate_polarity", to_string(candidate.polarity)}});
        bool accepted = verdict.at("same_event").get<bool>() &&
                        verdict.at("same_polarity").get<bool>();
        resolved.matches.push_back(MatchAudit{hit.node_id, hit.score, accepted});
        if (accepted) resolved.accepted.push_back(hit.node_id);
    }
    return resolved;
}

FactualContext retrieve_factual(const ParsedQuery& parsed, const CausalGraph& graph,
                                EmbeddingService& embed, ChatService& chat,
                                const QueryConfig& cfg) {
    FactualContext context;
    context.outcome_resolution = resolve_event(parsed.main_event, graph, embed, chat, cfg);
    context.outcome_nodes = context.outcome_resolution.accepted;
    if (context.outcome_nodes.empty()) {
        context.insufficient_evidence = true;
        return context;
    }

    for (const std::string& outcome : context.outcome_nodes) {
        for (CausalChain& chain : graph.traverse_upstream(outcome, cfg.d_factual)) {
            context.chains.push_back(std::move(chain));
        }
    }

    // Root and intermediate causes: every non-terminal node of every chain.
    std::map<std::string, std::vector<std::size_t>> cause_chains;
    for (std::size_t chain_index = 0; chain_index < context.chains.size(); ++chain_index) {
        const CausalChain& chain = context.chains[chain_index];
        for (std::size_t i = 0; i + 1 < chain.path.size(); ++i) {
            cause_chains[chain.path[i]].push_back(chain_index);
        }
    }
    for (auto& [node_id, indices] : cause_chains) {
        context.causes.push_back(CauseEntry{node_id, std::move(indices)});
    }

    // Edge rules with every stored source, deduplicated across chains.
    std::set<std::pair<std::string, std::string>> seen_pairs;
    for (const CausalChain& chain : context.chains) {
        for (std::size_t i = 0; i + 1 < chain.path.size(); ++i) {
            seen_pairs.insert({chain.path[i], chain.path[i + 1]});
        }
    }
    for (const auto& [cause_id, effect_id] : seen_pairs) {
        for (CausalEdge& edge : graph.edges_between(cause_id, effect_id)) {
            context.rules.push_back(std::move(edge));
        }
    }
    return context;
}

}  // namespace ckgrag
