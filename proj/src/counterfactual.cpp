#include "ckgrag/counterfactual.hpp"

#include <algorithm>
#include <set>

#include "ckgrag/error.hpp"
#include "ckgrag/text.hpp"

namespace ckgrag {

using json = nlohmann::json;

const char* to_string(Necessity n) {
    switch (n) {
        case Necessity::Necessary: return "necessary";
        case Necessity::NotNecessary: return "not_necessary";
        case Necessity::Undetermined: return "undetermined";
    }
    return "undetermined";
}

const char* to_string(RationaleCode r) {
    switch (r) {
        case RationaleCode::OutcomeAbsentInCf: return "outcome_absent_in_cf";
        case RationaleCode::OutcomePresentInCf: return "outcome_present_in_cf";
        case RationaleCode::NoCfNodeFound: return "no_cf_node_found";
    }
    return "no_cf_node_found";
}

std::string generate_counterfactual(const std::string& cause_text, ChatService& chat) {
    if (cause_text.empty()) throw Error(ErrorKind::EmptyInput, "cause text is empty");
    std::string canonical_cause = canonical_text(cause_text);
    auto validator = [&](const json& response) -> std::optional<std::string> {
        std::string candidate = canonical_text(response.at("counterfactual").get<std::string>());
        if (candidate.empty()) return "counterfactual is empty after normalization";
        if (candidate == canonical_cause) return "counterfactual equals the original cause";
        if (candidate == "not " + canonical_cause) {
            return "bare negation; a richer opposite state was requested";
        }
        return std::nullopt;
    };
    json response = chat.chat(PromptKind::GenerateCounterfactual,
                              json{{"cause_text", cause_text}}, validator);
    return response.at("counterfactual").get<std::string>();
}

CounterfactualProbe simulate(const std::string& cause_id, const std::string& cause_text,
                             const std::string& counterfactual_text,
                             const std::vector<std::string>& outcome_nodes,
                             const CausalGraph& graph, EmbeddingService& embed,
                             ChatService& chat, const CounterfactualConfig& cfg) {
    CounterfactualProbe probe;
    probe.cause_id = cause_id;
    probe.cause_text = cause_text;
    probe.counterfactual_text = counterfactual_text;
    // Same two-stage procedure as factual resolution, by construction.
    probe.resolution = resolve_event(counterfactual_text, graph, embed, chat, cfg.resolve);
    probe.matched_nodes = probe.resolution.accepted;

    std::set<std::string> outcomes(outcome_nodes.begin(), outcome_nodes.end());
    for (const std::string& matched : probe.matched_nodes) {
        for (CausalChain& chain : graph.traverse_downstream(matched, cfg.d_cf)) {
            for (const std::string& node_id : chain.path) {
                if (outcomes.count(node_id)) {
                    probe.outcome_reached = true;
                    break;
                }
            }
            probe.downstream.push_back(std::move(chain));
        }
    }
    return probe;
}

NecessityVerdict necessity_verdict(const CounterfactualProbe& probe) {
    if (probe.matched_nodes.empty()) {
        return NecessityVerdict{Necessity::Undetermined, RationaleCode::NoCfNodeFound};
    }
    if (probe.outcome_reached) {
        return NecessityVerdict{Necessity::NotNecessary, RationaleCode::OutcomePresentInCf};
    }
    return NecessityVerdict{Necessity::Necessary, RationaleCode::OutcomeAbsentInCf};
}

std::vector<ProbeResult> probe_all(const FactualContext& context, const CausalGraph& graph,
                                   EmbeddingService& embed, ChatService& chat,
                                   const CounterfactualConfig& cfg) {
    std::vector<ProbeResult> results;
    for (const CauseEntry& cause : context.causes) {  // causes are sorted by node id
        ProbeResult result;
        result.cause_id = cause.node_id;
        auto node = graph.node(cause.node_id);
        result.cause_text = node ? node->text : "";
        try {
            if (!node) throw Error(ErrorKind::UnknownNode, cause.node_id);
            std::string counterfactual = generate_counterfactual(result.cause_text, chat);
            result.probe = simulate(cause.node_id, result.cause_text, counterfactual,
                                    context.outcome_nodes, graph, embed, chat, cfg);
            result.verdict = necessity_verdict(result.probe);
        } catch (const Error& e) {
            result.probe.cause_id = cause.node_id;
            result.probe.cause_text = result.cause_text;
            result.verdict = NecessityVerdict{Necessity::Undetermined,
                                              RationaleCode::NoCfNodeFound};
            result.error = e.what();
        }
        results.push_back(std::move(result));
    }
    return results;
}

}  // namespace ckgrag
