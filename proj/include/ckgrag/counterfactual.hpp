#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ckgrag/query.hpp"

namespace ckgrag {

struct CounterfactualConfig {
    std::size_t d_cf = 3;
    QueryConfig resolve;  // shared two-stage resolution settings
};

/// One counterfactual test: the generated opposite, the graph nodes it
/// resolved to, and whether the outcome survives in the simulated world.
struct CounterfactualProbe {
    std::string cause_id;
    std::string cause_text;
    std::string counterfactual_text;
    ResolvedEvent resolution;
    std::vector<std::string> matched_nodes;
    std::vector<CausalChain> downstream;
    bool outcome_reached = false;
};

enum class Necessity { Necessary, NotNecessary, Undetermined };
enum class RationaleCode { OutcomeAbsentInCf, OutcomePresentInCf, NoCfNodeFound };

const char* to_string(Necessity n);
const char* to_string(RationaleCode r);

struct NecessityVerdict {
    Necessity verdict = Necessity::Undetermined;
    RationaleCode rationale = RationaleCode::NoCfNodeFound;
};

struct ProbeResult {
    std::string cause_id;
    std::string cause_text;
    CounterfactualProbe probe;
    NecessityVerdict verdict;
    std::optional<std::string> error;
};

/// Asks for the single best logical opposite; re-asks (within the retry
/// budget) when the reply equals the input, is empty after normalization, or
/// is a bare "not <input>".
std::string generate_counterfactual(const std::string& cause_text, ChatService& chat);

/// Resolves the counterfactual text with the same two-stage procedure as
/// factual events, then follows downstream effects.
CounterfactualProbe simulate(const std::string& cause_id, const std::string& cause_text,
                             const std::string& counterfactual_text,
                             const std::vector<std::string>& outcome_nodes,
                             const CausalGraph& graph, EmbeddingService& embed,
                             ChatService& chat, const CounterfactualConfig& cfg);

/// Pure mapping from probe to verdict:
///   no matched nodes      -> undetermined (no_cf_node_found)
///   outcome reached       -> not_necessary (outcome_present_in_cf)
///   otherwise             -> necessary (outcome_absent_in_cf)
NecessityVerdict necessity_verdict(const CounterfactualProbe& probe);

/// One probe per distinct cause, ordered by cause node id. A failure on one
/// cause degrades that cause to undetermined with an error note.
std::vector<ProbeResult> probe_all(const FactualContext& context, const CausalGraph& graph,
                                   EmbeddingService& embed, ChatService& chat,
                                   const CounterfactualConfig& cfg);

}  // namespace ckgrag
