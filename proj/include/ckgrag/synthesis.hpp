#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ckgrag/counterfactual.hpp"

namespace ckgrag {

/// Everything the synthesis prompt sees: factual chains, probes, verdicts,
/// and the deduplicated source references behind every cited edge.
struct EvidencePackage {
    ParsedQuery parsed;
    FactualContext factual;
    std::vector<ProbeResult> probes;
    std::vector<SourceRef> sources;
    bool insufficient_evidence = false;
};

struct CitedCause {
    std::string node_id;
    std::string text;
    RationaleCode rationale = RationaleCode::NoCfNodeFound;
    std::optional<std::string> error;
};

struct FinalAnswer {
    std::string answer_text;
    std::vector<CitedCause> validated_causes;  // verdict == necessary
    std::vector<CitedCause> unvalidated;       // not_necessary or undetermined
    std::vector<SourceRef> citations;
    bool insufficient_evidence = false;

    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// Validates that probes cover exactly the distinct causes of the factual
/// context (else InconsistentInputs) and assembles the package with
/// deterministic ordering.
EvidencePackage build_package(const ParsedQuery& parsed, const FactualContext& factual,
                              std::vector<ProbeResult> probes);

/// Stable plain-text rendering of a package; used as the synthesis prompt
/// context and as judge context downstream.
std::string render_package(const EvidencePackage& package, const CausalGraph& graph);

/// Final answer: prose from the synthesis prompt plus a programmatic cause
/// assessment. The validated/unvalidated split is computed from verdicts,
/// never parsed back out of prose. Insufficient evidence short-circuits to a
/// fixed no-speculation answer without a provider call.
FinalAnswer synthesize_answer(const EvidencePackage& package, const CausalGraph& graph,
                              ChatService& chat);

}  // namespace ckgrag
