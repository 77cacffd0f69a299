#include <doctest.h>

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ckgrag/error.hpp"
#include "ckgrag/providers.hpp"
#include "ckgrag/text.hpp"
#include "fixture_world.hpp"
#include "temp_dir.hpp"

using namespace ckgrag;
using namespace ckgrag::testing;
using json = nlohmann::json;

namespace {

PromptRegistry& registry() {
    static PromptRegistry instance = PromptRegistry::load(repo_prompts_dir());
    return instance;
}

}  // namespace

TEST_CASE("prompt templates load with versions and render payload fields") {
    const PromptTemplate& tmpl = registry().get(PromptKind::VerifyEquivalence);
    CHECK(tmpl.version == "1");

    std::string rendered = registry().render(
        PromptKind::VerifyEquivalence, json{{"event_text", "rates rise"},
                                            {"event_polarity", "increase"},
                                            {"candidate_text", "rates fall"},
                                            {"candidate_polarity", "decrease"}});
    CHECK(rendered.find("Event A: rates rise") != std::string::npos);
    CHECK(rendered.find("Event B polarity: decrease") != std::string::npos);
    CHECK(rendered.find("{{") == std::string::npos);

    CHECK_THROWS_AS(registry().render(PromptKind::VerifyEquivalence, json{{"x", 1}}), Error);
}

TEST_CASE("transcripts persist records and reload them") {
    TempDir dir("transcript");
    auto file = dir / "t.jsonl";
    {
        TranscriptStore store;
        store.attach_sink(file);
        CHECK(store.record("fp1", "extract_pairs", "{\"pairs\": []}"));
        CHECK_FALSE(store.record("fp1", "extract_pairs", "other"));  // first wins
        CHECK(store.record("fp2", "embed", "AAAA"));
    }
    TranscriptStore loaded = TranscriptStore::open(file, true);
    CHECK(loaded.size() == 2);
    CHECK(loaded.lookup("fp1") == "{\"pairs\": []}");
    CHECK(loaded.lookup("missing") == std::nullopt);
    CHECK_THROWS_AS(TranscriptStore::open(dir / "absent.jsonl", true), Error);
}

TEST_CASE("replay miss reports the fingerprint") {
    TranscriptStore transcript;
    ChatService chat(&registry(), ProviderMode::Replay, &transcript, nullptr, 3);
    json payload{{"query", "why?"}};
    std::string fp = chat.fingerprint(PromptKind::ParseQuery, payload);
    try {
        chat.chat(PromptKind::ParseQuery, payload);
        FAIL("expected ProviderUnavailable");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ProviderUnavailable);
        CHECK(std::string(e.what()).find(fp) != std::string::npos);
    }
}

TEST_CASE("schema validation is strict and retries consume distinct fingerprints") {
    TranscriptStore transcript;
    ChatService chat(&registry(), ProviderMode::Replay, &transcript, nullptr, 3);
    json payload{{"event_text", "a"},
                 {"event_polarity", "increase"},
                 {"candidate_text", "b"},
                 {"candidate_polarity", "increase"}};

    SUBCASE("valid response passes") {
        transcript.record(chat.fingerprint(PromptKind::VerifyEquivalence, payload), "v",
                          R"({"same_event": true, "same_polarity": false})");
        json out = chat.chat(PromptKind::VerifyEquivalence, payload);
        CHECK(out.at("same_event") == true);
        CHECK(out.at("same_polarity") == false);
    }

    SUBCASE("unknown field is rejected, retry succeeds") {
        transcript.record(chat.fingerprint(PromptKind::VerifyEquivalence, payload), "v",
                          R"({"same_event": true, "same_polarity": true, "extra": 1})");
        json retry_payload = payload;
        retry_payload["retry"] = 1;
        transcript.record(chat.fingerprint(PromptKind::VerifyEquivalence, retry_payload), "v",
                          R"({"same_event": true, "same_polarity": true})");
        json out = chat.chat(PromptKind::VerifyEquivalence, payload);
        CHECK(out.at("same_event") == true);
    }

    SUBCASE("persistently invalid responses exhaust the budget") {
        transcript.record(chat.fingerprint(PromptKind::VerifyEquivalence, payload), "v",
                          "not json");
        for (int retry = 1; retry < 3; ++retry) {
            json retry_payload = payload;
            retry_payload["retry"] = retry;
            transcript.record(chat.fingerprint(PromptKind::VerifyEquivalence, retry_payload),
                              "v", "not json");
        }
        try {
            chat.chat(PromptKind::VerifyEquivalence, payload);
            FAIL("expected MalformedAfterRetries");
        } catch (const MalformedAfterRetriesError& e) {
            CHECK(e.kind() == ErrorKind::MalformedAfterRetries);
            REQUIRE(e.attempts().size() == 3);
            CHECK(e.attempts()[0] == "not json");
        }
    }
}

TEST_CASE("judge scores outside 1..5 are retried") {
    TranscriptStore transcript;
    ChatService chat(&registry(), ProviderMode::Replay, &transcript, nullptr, 3);
    json payload{{"question", "q"},
                 {"ideal_answer", "i"},
                 {"generated_answer", "g"},
                 {"context", "c"}};
    transcript.record(chat.fingerprint(PromptKind::JudgeAnswer, payload), "j",
                      R"({"c_score": 6, "fr_score": 5})");
    json retry_payload = payload;
    retry_payload["retry"] = 1;
    transcript.record(chat.fingerprint(PromptKind::JudgeAnswer, retry_payload), "j",
                      R"({"c_score": 5, "fr_score": 5})");
    json out = chat.chat(PromptKind::JudgeAnswer, payload);
    CHECK(out.at("c_score") == 5);
}

TEST_CASE("fingerprints cover kind, template version, and canonical payload") {
    TranscriptStore transcript;
    ChatService chat(&registry(), ProviderMode::Replay, &transcript, nullptr, 3);
    json a{{"query", "x"}};
    json b{{"query", "y"}};
    CHECK(chat.fingerprint(PromptKind::ParseQuery, a) !=
          chat.fingerprint(PromptKind::ParseQuery, b));
    CHECK(chat.fingerprint(PromptKind::ParseQuery, a) !=
          chat.fingerprint(PromptKind::SynthesizeAnswer, a));
    // Key order in the payload object does not matter.
    json c = json::parse(R"({"candidate_polarity":"p","candidate_text":"t",
                             "event_polarity":"p","event_text":"e"})");
    json d = json::parse(R"({"event_text":"e","event_polarity":"p",
                             "candidate_text":"t","candidate_polarity":"p"})");
    CHECK(chat.fingerprint(PromptKind::VerifyEquivalence, c) ==
          chat.fingerprint(PromptKind::VerifyEquivalence, d));
}

TEST_CASE("mock_embed is deterministic, unit norm, and spreads unrelated texts") {
    Embedding a1 = mock_embed("a");
    Embedding a2 = mock_embed("a");
    CHECK(a1 == a2);  // bit identical
    CHECK(mock_embed("  A ") == a1);  // canonicalization applies

    double norm_sq = 0.0;
    for (float v : a1.values()) norm_sq += static_cast<double>(v) * v;
    CHECK(std::abs(std::sqrt(norm_sq) - 1.0) < 1e-6);

    CHECK(a1.dot(mock_embed("b")) < 0.9);
    CHECK_THROWS_AS(mock_embed("   "), Error);
}

TEST_CASE("mock_embed keeps distinct words dissimilar over a 1000-word sample") {
    // Frozen bound chosen after measuring the token-hash expansion: adjacent
    // pseudo-words stay far below the 0.9 line.
    Embedding previous = mock_embed("word0");
    double worst = -1.0;
    for (int i = 1; i < 1000; ++i) {
        Embedding current = mock_embed("word" + std::to_string(i));
        worst = std::max(worst, current.dot(previous));
        previous = current;
    }
    CHECK(worst < 0.9);
}

TEST_CASE("mock_embed gives shared-token texts graded similarity") {
    double cos = mock_embed("wheat prices rose").dot(mock_embed("wheat prices fell"));
    CHECK(cos > 0.4);
    CHECK(cos < 0.9);
    double lower = mock_embed("wheat prices rose").dot(mock_embed("retail sales fell"));
    CHECK(lower < cos);
}

TEST_CASE("embedding service contracts") {
    EmbeddingService service = EmbeddingService::mock();
    std::vector<std::string> texts{"x", "x"};
    auto out = service.embed(texts);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == out[1]);
    std::vector<std::string> bad{""};
    CHECK_THROWS_AS(service.embed(bad), Error);

    SUBCASE("replay miss carries the fingerprint") {
        TranscriptStore transcript;
        EmbeddingService replay(EmbedMode::Replay, &transcript, nullptr);
        try {
            replay.embed_one("hello");
            FAIL("expected ProviderUnavailable");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ProviderUnavailable);
            CHECK(std::string(e.what()).find(EmbeddingService::fingerprint("hello")) !=
                  std::string::npos);
        }
    }

    SUBCASE("replay returns recorded vectors bit-exactly") {
        TranscriptStore transcript;
        Embedding original = mock_embed("hello");
        transcript.record(EmbeddingService::fingerprint("hello"), "embed",
                          original.to_base64());
        EmbeddingService replay(EmbedMode::Replay, &transcript, nullptr);
        CHECK(replay.embed_one("hello") == original);
    }
}

TEST_CASE("providers are callable from multiple threads") {
    TranscriptStore transcript;
    ChatService chat(&registry(), ProviderMode::Replay, &transcript, nullptr, 3);
    std::vector<json> payloads;
    for (int i = 0; i < 8; ++i) {
        payloads.push_back(json{{"cause_text", "event " + std::to_string(i)}});
        transcript.record(chat.fingerprint(PromptKind::GenerateCounterfactual, payloads[i]),
                          "g", R"({"counterfactual": "opposite )" + std::to_string(i) + "\"}");
    }
    EmbeddingService embed = EmbeddingService::mock();

    std::atomic<int> mismatches{0};
    std::vector<std::thread> workers;
    for (int t = 0; t < 4; ++t) {
        workers.emplace_back([&, t] {
            for (int i = 0; i < 50; ++i) {
                int pick = (t + i) % 8;
                json out = chat.chat(PromptKind::GenerateCounterfactual, payloads[pick]);
                if (out.at("counterfactual") != "opposite " + std::to_string(pick)) {
                    mismatches.fetch_add(1);
                }
                Embedding e = embed.embed_one("thread text " + std::to_string(pick));
                if (!(e == mock_embed("thread text " + std::to_string(pick)))) {
                    mismatches.fetch_add(1);
                }
            }
        });
    }
    for (auto& worker : workers) worker.join();
    CHECK(mismatches.load() == 0);
}

TEST_CASE("live HTTP providers speak the chat-completions contract") {
    httplib::Server server;
    std::atomic<int> chat_calls{0};
    json last_chat_body;
    std::string last_auth;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                            httplib::Response& res) {
        ++chat_calls;
        last_chat_body = json::parse(req.body);
        auto it = req.headers.find("Authorization");
        last_auth = it != req.headers.end() ? it->second : "";
        json body{{"choices",
                   json::array({json{{"message",
                                      json{{"content",
                                            R"({"counterfactual": "rates fall"})"}}}}})}};
        res.set_content(body.dump(), "application/json");
    });
    server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        json request = json::parse(req.body);
        json data = json::array();
        for (std::size_t i = 0; i < request.at("input").size(); ++i) {
            std::vector<double> values(Embedding::kDim, 0.0);
            values[i] = 1.0;
            data.push_back(json{{"embedding", values}});
        }
        res.set_content(json{{"data", data}}.dump(), "application/json");
    });

    int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpEndpoint endpoint{"http://127.0.0.1:" + std::to_string(port) + "/v1", "secret-key",
                          "test-model"};

    SUBCASE("chat renders the prompt and pins temperature to zero") {
        HttpChatTransport transport(endpoint);
        ChatService chat(&registry(), ProviderMode::Live, nullptr, &transport, 3);
        json out = chat.chat(PromptKind::GenerateCounterfactual,
                             json{{"cause_text", "rates rise"}});
        CHECK(out.at("counterfactual") == "rates fall");
        CHECK(last_chat_body.at("temperature") == 0);
        CHECK(last_chat_body.at("model") == "test-model");
        CHECK(last_auth == "Bearer secret-key");
        std::string content = last_chat_body.at("messages").at(0).at("content");
        CHECK(content.find("rates rise") != std::string::npos);
    }

    SUBCASE("record mode captures the cassette and replays it") {
        TempDir dir("record");
        auto file = dir / "cassette.jsonl";
        {
            HttpChatTransport transport(endpoint);
            TranscriptStore transcript;
            transcript.attach_sink(file);
            ChatService chat(&registry(), ProviderMode::Record, &transcript, &transport, 3);
            chat_calls = 0;
            chat.chat(PromptKind::GenerateCounterfactual, json{{"cause_text", "rates rise"}});
            chat.chat(PromptKind::GenerateCounterfactual, json{{"cause_text", "rates rise"}});
            CHECK(chat_calls == 1);  // second call served from the cassette
        }
        TranscriptStore replayed = TranscriptStore::open(file, true);
        ChatService offline(&registry(), ProviderMode::Replay, &replayed, nullptr, 3);
        json out = offline.chat(PromptKind::GenerateCounterfactual,
                                json{{"cause_text", "rates rise"}});
        CHECK(out.at("counterfactual") == "rates fall");
    }

    SUBCASE("embeddings arrive in order and normalized") {
        HttpEmbedTransport transport(endpoint);
        EmbeddingService service(EmbedMode::Live, nullptr, &transport);
        Embedding e = service.embed_one("anything");
        CHECK(e.values()[0] == doctest::Approx(1.0));
    }

    SUBCASE("http errors surface as ProviderUnavailable") {
        HttpEndpoint bad{"http://127.0.0.1:" + std::to_string(port) + "/missing", "", "m"};
        HttpChatTransport transport(bad);
        ChatService chat(&registry(), ProviderMode::Live, nullptr, &transport, 1);
        CHECK_THROWS_AS(chat.chat(PromptKind::GenerateCounterfactual,
                                  json{{"cause_text", "x"}}),
                        Error);
    }

    server.stop();
    server_thread.join();
}
