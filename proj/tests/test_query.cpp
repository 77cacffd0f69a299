#include <doctest.h>

#include <set>

#include "ckgrag/error.hpp"
#include "ckgrag/query.hpp"
#include "ckgrag/text.hpp"
#include "fixture_world.hpp"
#include "oracles.hpp"

using namespace ckgrag;
using namespace ckgrag::testing;

namespace {

SourceRef src() { return SourceRef{"doc", 0, 0, 4, "abcd"}; }

}  // namespace

TEST_CASE("parse_query decomposes fixture queries into SCM components") {
    FixtureRuntime runtime;

    ParsedQuery factual = parse_query("What caused food prices to rise?", runtime.chat);
    CHECK(factual.main_event == "food prices rose");
    CHECK(factual.interventions.empty());
    CHECK(factual.raw_query == "What caused food prices to rise?");

    ParsedQuery counterfactual = parse_query(
        "Would food prices have risen if the drought had not occurred?", runtime.chat);
    REQUIRE(counterfactual.interventions.size() == 1);
    CHECK(counterfactual.interventions[0] == "no drought occurred");
    CHECK(counterfactual.main_event == "food prices rose");

    CHECK_THROWS_AS(parse_query("", runtime.chat), Error);
}

TEST_CASE("parse_query handles the regulation-impact example") {
    FixtureRuntime runtime;
    runtime.transport.parse_table
        ["What was the impact of the new regulation on the company's financial report?"] =
            nlohmann::json{{"evidences", {"new regulation enacted"}},
                           {"interventions", nlohmann::json::array()},
                           {"query_variable", "the financial report impact"},
                           {"main_event", "the company's financial report changed"}}
                .dump();
    ParsedQuery parsed = parse_query(
        "What was the impact of the new regulation on the company's financial report?",
        runtime.chat);
    REQUIRE(parsed.evidences.size() == 1);
    CHECK(parsed.evidences[0] == "new regulation enacted");
    CHECK(parsed.main_event == "the company's financial report changed");
}

TEST_CASE("resolve_event accepts exact matches and rejects opposite polarity") {
    FixtureRuntime runtime;
    runtime.transport.polarity_table["prices increase"] = "increase";
    runtime.transport.polarity_table["prices decrease"] = "decrease";
    runtime.transport.same_event_pairs.insert({"prices decrease", "prices increase"});

    CausalGraph graph;
    graph.add_node("prices decrease", mock_embed("prices decrease"), Polarity::Decrease,
                   src());

    QueryConfig cfg;
    SUBCASE("identical text is accepted") {
        graph.add_node("prices increase", mock_embed("prices increase"), Polarity::Increase,
                       src());
        ResolvedEvent resolved =
            resolve_event("prices increase", graph, runtime.embed, runtime.chat, cfg);
        REQUIRE(resolved.accepted.size() == 1);
        CHECK(resolved.accepted[0] == node_id_for("prices increase"));
    }

    SUBCASE("high-cosine opposite polarity is surfaced then rejected") {
        ResolvedEvent resolved =
            resolve_event("prices increase", graph, runtime.embed, runtime.chat, cfg);
        CHECK(resolved.accepted.empty());
        REQUIRE(resolved.matches.size() == 1);
        CHECK(resolved.matches[0].node_id == node_id_for("prices decrease"));
        CHECK(resolved.matches[0].score > 0.3);
        CHECK_FALSE(resolved.matches[0].verdict);
    }

    SUBCASE("empty graph resolves to nothing") {
        CausalGraph empty;
        ResolvedEvent resolved =
            resolve_event("prices increase", empty, runtime.embed, runtime.chat, cfg);
        CHECK(resolved.matches.empty());
        CHECK(resolved.accepted.empty());
    }
}

TEST_CASE("stage-2 acceptance is monotone over stage-1 candidates") {
    FixtureRuntime runtime;
    CausalGraph graph;
    build_fixture_graph(graph, runtime);
    for (const char* text : {"food prices rose", "retail sales fell", "wheat prices"}) {
        ResolvedEvent resolved =
            resolve_event(text, graph, runtime.embed, runtime.chat, QueryConfig{});
        std::set<std::string> stage1;
        for (const MatchAudit& m : resolved.matches) stage1.insert(m.node_id);
        for (const std::string& id : resolved.accepted) CHECK(stage1.count(id) == 1);
        // Scores arrive descending.
        for (std::size_t i = 1; i < resolved.matches.size(); ++i) {
            CHECK(resolved.matches[i - 1].score >= resolved.matches[i].score);
        }
    }
}

TEST_CASE("retrieve_factual collects chains, causes, and rules on a simple graph") {
    FixtureRuntime runtime;
    CausalGraph graph;
    std::string a = graph.add_node("alpha occurred", mock_embed("alpha occurred"),
                                   Polarity::Presence, src());
    std::string b = graph.add_node("beta occurred", mock_embed("beta occurred"),
                                   Polarity::Presence, src());
    std::string c = graph.add_node("gamma occurred", mock_embed("gamma occurred"),
                                   Polarity::Presence, src());
    graph.add_edge(a, b, src());
    graph.add_edge(b, c, src());

    ParsedQuery parsed;
    parsed.main_event = "gamma occurred";
    parsed.raw_query = "why gamma?";
    FactualContext context =
        retrieve_factual(parsed, graph, runtime.embed, runtime.chat, QueryConfig{5, 2});

    CHECK_FALSE(context.insufficient_evidence);
    REQUIRE(context.outcome_nodes.size() == 1);
    CHECK(context.outcome_nodes[0] == c);
    REQUIRE(context.chains.size() == 2);
    std::set<std::string> cause_ids;
    for (const CauseEntry& cause : context.causes) cause_ids.insert(cause.node_id);
    CHECK(cause_ids == std::set<std::string>{a, b});
    // Every cause appears in at least one chain ending at the outcome.
    for (const CauseEntry& cause : context.causes) {
        CHECK_FALSE(cause.chain_indices.empty());
        for (std::size_t index : cause.chain_indices) {
            const CausalChain& chain = context.chains[index];
            CHECK(chain.path.back() == c);
            CHECK(std::find(chain.path.begin(), chain.path.end(), cause.node_id) !=
                  chain.path.end());
        }
    }
    // Rules are verifiable against the store edge set.
    for (const CausalEdge& rule : context.rules) {
        bool found = false;
        for (const CausalEdge& edge : graph.edges_snapshot()) {
            if (edge.cause_id == rule.cause_id && edge.effect_id == rule.effect_id &&
                edge.source == rule.source) {
                found = true;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("unresolvable main event yields insufficient evidence, not an error") {
    FixtureRuntime runtime;
    CausalGraph graph;
    build_fixture_graph(graph, runtime);
    ParsedQuery parsed;
    parsed.main_event = "the zeppelin exploded";
    parsed.raw_query = "why?";
    FactualContext context =
        retrieve_factual(parsed, graph, runtime.embed, runtime.chat, QueryConfig{});
    CHECK(context.insufficient_evidence);
    CHECK(context.causes.empty());
    CHECK(context.chains.empty());
}

TEST_CASE("fixture retrieval matches the path-enumeration oracle") {
    FixtureRuntime runtime;
    CausalGraph graph;
    build_fixture_graph(graph, runtime);

    ParsedQuery parsed = parse_query("What caused food prices to rise?", runtime.chat);
    FactualContext context =
        retrieve_factual(parsed, graph, runtime.embed, runtime.chat, QueryConfig{});

    auto expected =
        oracle_paths_to(graph.edges_snapshot(), node_id_for("food prices rose"), 3);
    REQUIRE(context.chains.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(context.chains[i].path == expected[i]);
    }
    std::set<std::string> cause_texts;
    for (const CauseEntry& cause : context.causes) {
        cause_texts.insert(graph.node(cause.node_id)->text);
    }
    CHECK(cause_texts == std::set<std::string>{"drought occurred", "harvests fell",
                                               "fuel prices rose", "transport costs rose"});
}
