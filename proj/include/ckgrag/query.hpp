#pragma once

#include <string>
#include <vector>

#include "ckgrag/providers.hpp"
#include "ckgrag/store.hpp"

namespace ckgrag {

struct QueryConfig {
    std::size_t retrieve_k = 5;
    std::size_t d_factual = 3;
};

/// SCM decomposition of a user query.
struct ParsedQuery {
    std::vector<std::string> evidences;
    std::vector<std::string> interventions;
    std::string query_variable;
    std::string main_event;
    std::string raw_query;
};

struct MatchAudit {
    std::string node_id;
    double score = 0.0;
    bool verdict = false;
};

/// Two-stage resolution of an event text against the graph: stage-1 cosine
/// candidates in `matches`, stage-2 survivors in `accepted`.
struct ResolvedEvent {
    std::string query_text;
    std::vector<MatchAudit> matches;
    std::vector<std::string> accepted;
};

struct CauseEntry {
    std::string node_id;
    std::vector<std::size_t> chain_indices;
};

struct FactualContext {
    std::vector<std::string> outcome_nodes;
    std::vector<CausalChain> chains;
    std::vector<CauseEntry> causes;  // sorted by node id
    std::vector<CausalEdge> rules;
    bool insufficient_evidence = false;
    ResolvedEvent outcome_resolution;
};

ParsedQuery parse_query(const std::string& text, ChatService& chat);

/// Stage 1: embed + top-k cosine; stage 2: equivalence-and-polarity
/// verification of every candidate in rank order. Accepted keeps all passing
/// candidates, in rank order.
ResolvedEvent resolve_event(const std::string& event_text, const CausalGraph& graph,
                            EmbeddingService& embed, ChatService& chat,
                            const QueryConfig& cfg);

/// Resolves the main event and collects upstream chains, causes, and edge
/// rules. An unresolvable main event yields insufficient_evidence=true, not
/// an error.
FactualContext retrieve_factual(const ParsedQuery& parsed, const CausalGraph& graph,
                                EmbeddingService& embed, ChatService& chat,
                                const QueryConfig& cfg);

}  // namespace ckgrag
