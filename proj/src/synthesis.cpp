#include "ckgrag/synthesis.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "ckgrag/error.hpp"

namespace ckgrag {

using json = nlohmann::json;

namespace {

json source_json(const SourceRef& s) {
    return json{{"doc_id", s.doc_id},
                {"chunk_index", s.chunk_index},
                {"char_start", s.char_start},
                {"char_end", s.char_end}};
}

json cause_json(const CitedCause& c) {
    json out{{"node_id", c.node_id}, {"text", c.text}, {"rationale", to_string(c.rationale)}};
    if (c.error) out["error"] = *c.error;
    return out;
}

const char* rationale_line(RationaleCode code) {
    switch (code) {
        case RationaleCode::OutcomeAbsentInCf:
            return "necessary: simulating its opposite removed the outcome";
        case RationaleCode::OutcomePresentInCf:
            return "not necessary: the outcome persisted under its opposite";
        case RationaleCode::NoCfNodeFound:
            return "undetermined: no counterfactual state was found in the graph";
    }
    return "undetermined";
}

}  // namespace

json FinalAnswer::to_json() const {
    json validated = json::array();
    for (const CitedCause& c : validated_causes) validated.push_back(cause_json(c));
    json other = json::array();
    for (const CitedCause& c : unvalidated) other.push_back(cause_json(c));
    json cites = json::array();
    for (const SourceRef& s : citations) cites.push_back(source_json(s));
    return json{{"answer_text", answer_text},
                {"validated_causes", validated},
                {"unvalidated", other},
                {"citations", cites},
                {"insufficient_evidence", insufficient_evidence}};
}

std::string FinalAnswer::to_text() const {
    std::ostringstream out;
    out << answer_text << "\n";
    if (!citations.empty()) {
        out << "\nSources:\n";
        for (const SourceRef& s : citations) {
            out << "  - " << s.doc_id << " [" << s.char_start << ", " << s.char_end << ")\n";
        }
    }
    return out.str();
}

EvidencePackage build_package(const ParsedQuery& parsed, const FactualContext& factual,
                              std::vector<ProbeResult> probes) {
    std::set<std::string> cause_ids;
    for (const CauseEntry& cause : factual.causes) cause_ids.insert(cause.node_id);
    std::set<std::string> probe_ids;
    for (const ProbeResult& probe : probes) probe_ids.insert(probe.cause_id);
    if (cause_ids != probe_ids) {
        throw Error(ErrorKind::InconsistentInputs,
                    "probe set does not match the factual cause set (" +
                        std::to_string(probe_ids.size()) + " probes, " +
                        std::to_string(cause_ids.size()) + " causes)");
    }

    EvidencePackage package;
    package.parsed = parsed;
    package.factual = factual;
    package.probes = std::move(probes);
    package.insufficient_evidence = factual.insufficient_evidence;
    std::sort(package.probes.begin(), package.probes.end(),
              [](const ProbeResult& a, const ProbeResult& b) { return a.cause_id < b.cause_id; });

    // Every chain edge's source is covered because rules carry all stored
    // edges along the chains.
    std::set<std::string> seen;
    for (const CausalEdge& rule : package.factual.rules) {
        std::ostringstream key;
        key << rule.source.doc_id << '\x1f' << rule.source.chunk_index << '\x1f'
            << rule.source.char_start << '\x1f' << rule.source.char_end;
        if (seen.insert(key.str()).second) package.sources.push_back(rule.source);
    }
    std::sort(package.sources.begin(), package.sources.end(),
              [](const SourceRef& a, const SourceRef& b) { return a.key() < b.key(); });
    return package;
}

std::string render_package(const EvidencePackage& package, const CausalGraph& graph) {
    auto text_of = [&](const std::string& node_id) {
        auto node = graph.node(node_id);
        return node ? node->text : node_id;
    };
    std::ostringstream out;
    out << "Question: " << package.parsed.raw_query << "\n";
    out << "Main event: " << package.parsed.main_event << "\n";
    if (!package.parsed.evidences.empty()) {
        out << "Evidences:\n";
        for (const std::string& e : package.parsed.evidences) out << "  - " << e << "\n";
    }
    if (!package.parsed.interventions.empty()) {
        out << "Hypothetical interventions:\n";
        for (const std::string& i : package.parsed.interventions) out << "  - " << i << "\n";
    }
    if (package.insufficient_evidence) {
        out << "No factual causal chains were found for the main event.\n";
        return out.str();
    }
    out << "Factual causal chains:\n";
    for (const CausalChain& chain : package.factual.chains) {
        out << "  - ";
        for (std::size_t i = 0; i < chain.path.size(); ++i) {
            if (i > 0) out << " -> ";
            out << text_of(chain.path[i]);
        }
        out << "\n";
    }
    out << "Counterfactual probes:\n";
    for (const ProbeResult& probe : package.probes) {
        out << "  - cause: " << probe.cause_text << "\n";
        out << "    opposite: "
            << (probe.probe.counterfactual_text.empty() ? "(unavailable)"
                                                        : probe.probe.counterfactual_text)
            << "\n";
        out << "    verdict: " << to_string(probe.verdict.verdict) << " ("
            << to_string(probe.verdict.rationale) << ")\n";
    }
    out << "Sources:\n";
    for (const SourceRef& s : package.sources) {
        out << "  - " << s.doc_id << " [" << s.char_start << ", " << s.char_end << ")\n";
    }
    return out.str();
}

FinalAnswer synthesize_answer(const EvidencePackage& package, const CausalGraph& graph,
                              ChatService& chat) {
    FinalAnswer answer;
    answer.insufficient_evidence = package.insufficient_evidence;
    answer.citations = package.sources;

    if (package.insufficient_evidence) {
        answer.answer_text =
            "No grounded causal account was found in the knowledge graph for this "
            "question. The main event could not be matched to any verified node, so no "
            "causes can be asserted.";
        return answer;
    }

    for (const ProbeResult& probe : package.probes) {
        CitedCause cause{probe.cause_id, probe.cause_text, probe.verdict.rationale,
                         probe.error};
        if (probe.verdict.verdict == Necessity::Necessary) {
            answer.validated_causes.push_back(std::move(cause));
        } else {
            answer.unvalidated.push_back(std::move(cause));
        }
    }

    json response = chat.chat(PromptKind::SynthesizeAnswer,
                              json{{"question", package.parsed.raw_query},
                                   {"package", render_package(package, graph)}});

    std::ostringstream text;
    text << response.at("answer").get<std::string>() << "\n\nCause assessment:\n";
    for (const ProbeResult& probe : package.probes) {
        text << "  - \"" << probe.cause_text << "\": " << rationale_line(probe.verdict.rationale)
             << "\n";
    }
    answer.answer_text = text.str();
    return answer;
}

}  // namespace ckgrag
