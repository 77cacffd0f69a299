#include <doctest.h>

#include <set>

#include "ckgrag/error.hpp"
#include "ckgrag/synthesis.hpp"
#include "ckgrag/text.hpp"
#include "fixture_world.hpp"

using namespace ckgrag;
using namespace ckgrag::testing;

namespace {

struct FixturePipeline {
    FixtureRuntime runtime;
    CausalGraph graph;
    ParsedQuery parsed;
    FactualContext context;
    std::vector<ProbeResult> probes;

    explicit FixturePipeline(const std::string& query) {
        build_fixture_graph(graph, runtime);
        parsed = parse_query(query, runtime.chat);
        context = retrieve_factual(parsed, graph, runtime.embed, runtime.chat, QueryConfig{});
        probes = probe_all(context, graph, runtime.embed, runtime.chat,
                           CounterfactualConfig{});
    }
};

}  // namespace

TEST_CASE("build_package validates probe coverage and orders deterministically") {
    FixturePipeline pipe("What caused food prices to rise?");

    EvidencePackage package = build_package(pipe.parsed, pipe.context, pipe.probes);
    CHECK_FALSE(package.insufficient_evidence);
    REQUIRE(package.probes.size() == pipe.context.causes.size());
    for (std::size_t i = 1; i < package.probes.size(); ++i) {
        CHECK(package.probes[i - 1].cause_id < package.probes[i].cause_id);
    }
    for (std::size_t i = 1; i < package.sources.size(); ++i) {
        CHECK(package.sources[i - 1].key() < package.sources[i].key());
    }

    SUBCASE("every chain edge source appears in the package sources") {
        std::set<std::string> source_keys;
        for (const SourceRef& s : package.sources) {
            source_keys.insert(s.doc_id + "#" + std::to_string(s.char_start));
        }
        for (const CausalChain& chain : package.factual.chains) {
            for (const CausalEdge& edge : chain.edges) {
                CHECK(source_keys.count(edge.source.doc_id + "#" +
                                        std::to_string(edge.source.char_start)) == 1);
            }
        }
    }

    SUBCASE("missing probe is rejected") {
        auto incomplete = pipe.probes;
        incomplete.pop_back();
        CHECK_THROWS_AS(build_package(pipe.parsed, pipe.context, incomplete), Error);
        try {
            build_package(pipe.parsed, pipe.context, incomplete);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InconsistentInputs);
        }
    }
}

TEST_CASE("package sources equal the union of the cited edge sources") {
    FixturePipeline pipe("What caused food prices to rise?");
    EvidencePackage package = build_package(pipe.parsed, pipe.context, pipe.probes);

    // Independent recomputation of the union over the fixture graph.
    std::set<std::pair<std::string, std::size_t>> expected;
    for (const CausalEdge& rule : pipe.context.rules) {
        expected.insert({rule.source.doc_id, rule.source.char_start});
    }
    std::set<std::pair<std::string, std::size_t>> got;
    for (const SourceRef& s : package.sources) got.insert({s.doc_id, s.char_start});
    CHECK(got == expected);
    std::set<std::string> docs;
    for (const SourceRef& s : package.sources) docs.insert(s.doc_id);
    CHECK(docs == std::set<std::string>{"drought.txt", "fuel.txt"});
}

TEST_CASE("synthesize_answer maps verdicts programmatically") {
    FixturePipeline pipe("What caused food prices to rise?");
    EvidencePackage package = build_package(pipe.parsed, pipe.context, pipe.probes);
    FinalAnswer answer = synthesize_answer(package, pipe.graph, pipe.runtime.chat);

    std::set<std::string> validated;
    for (const CitedCause& c : answer.validated_causes) validated.insert(c.text);
    CHECK(validated == std::set<std::string>{"drought occurred", "harvests fell"});
    std::set<std::string> unvalidated;
    for (const CitedCause& c : answer.unvalidated) unvalidated.insert(c.text);
    CHECK(unvalidated == std::set<std::string>{"fuel prices rose", "transport costs rose"});

    // validated and unvalidated never overlap
    for (const CitedCause& c : answer.validated_causes) CHECK(unvalidated.count(c.text) == 0);

    // The prose stays consistent with the structured verdicts.
    CHECK(answer.answer_text.find("Cause assessment:") != std::string::npos);
    for (const CitedCause& c : answer.validated_causes) {
        CHECK(answer.answer_text.find("\"" + c.text + "\": necessary") != std::string::npos);
    }
    for (const CitedCause& c : answer.unvalidated) {
        CHECK(answer.answer_text.find("\"" + c.text + "\"") != std::string::npos);
    }
    // Citations are exactly the package sources.
    REQUIRE(answer.citations.size() == package.sources.size());
    for (std::size_t i = 0; i < answer.citations.size(); ++i) {
        CHECK(answer.citations[i] == package.sources[i]);
    }
    // Prose comes from the authored synthesis response.
    CHECK(answer.answer_text.find("Food prices rose primarily because the drought") == 0);
}

TEST_CASE("insufficient evidence yields a fixed no-speculation answer") {
    FixtureRuntime runtime;
    CausalGraph graph;  // empty
    ParsedQuery parsed;
    parsed.main_event = "anything";
    parsed.raw_query = "why anything?";
    FactualContext context =
        retrieve_factual(parsed, graph, runtime.embed, runtime.chat, QueryConfig{});
    EvidencePackage package = build_package(parsed, context, {});

    // A replay service over an empty transcript proves no provider call happens.
    PromptRegistry registry = PromptRegistry::load(repo_prompts_dir());
    TranscriptStore empty_transcript;
    ChatService offline(&registry, ProviderMode::Replay, &empty_transcript, nullptr, 3);
    FinalAnswer answer = synthesize_answer(package, graph, offline);

    CHECK(answer.insufficient_evidence);
    CHECK(answer.validated_causes.empty());
    CHECK(answer.citations.empty());
    CHECK(answer.answer_text.find("No grounded causal account") != std::string::npos);
}

TEST_CASE("render_package is deterministic and self-contained") {
    FixturePipeline pipe("Why did consumer borrowing fall?");
    EvidencePackage package = build_package(pipe.parsed, pipe.context, pipe.probes);
    std::string rendered = render_package(package, pipe.graph);
    CHECK(rendered == render_package(package, pipe.graph));
    CHECK(rendered.find("Question: Why did consumer borrowing fall?") != std::string::npos);
    CHECK(rendered.find("interest rates rose") != std::string::npos);
    CHECK(rendered.find("verdict: necessary") != std::string::npos);
}
