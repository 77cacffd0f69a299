#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ckgrag/embedding.hpp"

namespace ckgrag {

// ---------------------------------------------------------------------------
// Prompt kinds and templates

enum class PromptKind {
    ExtractPairs,
    VerifyEquivalence,
    ParseQuery,
    GenerateCounterfactual,
    SynthesizeAnswer,
    JudgeAnswer,
    BaselineAnswer,
};

inline constexpr std::array<PromptKind, 7> kAllPromptKinds = {
    PromptKind::ExtractPairs,        PromptKind::VerifyEquivalence,
    PromptKind::ParseQuery,          PromptKind::GenerateCounterfactual,
    PromptKind::SynthesizeAnswer,    PromptKind::JudgeAnswer,
    PromptKind::BaselineAnswer,
};

const char* to_string(PromptKind kind);

struct PromptTemplate {
    std::string version;
    std::string body;
};

/// Loads `<kind>.txt` files from a prompts directory. The file's version line
/// is part of every request fingerprint, so editing a template without
/// bumping its version breaks replay loudly instead of silently.
class PromptRegistry {
public:
    static PromptRegistry load(const std::filesystem::path& dir);

    const PromptTemplate& get(PromptKind kind) const;
    std::string render(PromptKind kind, const nlohmann::json& payload) const;

private:
    std::map<PromptKind, PromptTemplate> templates_;
};

// ---------------------------------------------------------------------------
// Transcripts (record/replay cassettes)

/// Append-only store of (fingerprint, kind, response) records backed by a
/// JSONL file. Lookups are thread-safe; appends are serialized.
class TranscriptStore {
public:
    TranscriptStore() = default;
    TranscriptStore(TranscriptStore&& other) noexcept;
    TranscriptStore& operator=(TranscriptStore&& other) noexcept;

    static TranscriptStore open(const std::filesystem::path& file, bool must_exist);

    /// Opens (creating if needed) the backing file so record() persists.
    void attach_sink(const std::filesystem::path& file);

    std::optional<std::string> lookup(const std::string& fingerprint) const;

    /// Stores a response; returns false when the fingerprint is already
    /// present (the first recording wins).
    bool record(const std::string& fingerprint, const std::string& kind,
                const std::string& response);

    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::string> entries_;
    std::filesystem::path sink_;
    bool sink_open_ = false;
};

std::string file_sha256(const std::filesystem::path& file);

// ---------------------------------------------------------------------------
// Chat

enum class ProviderMode { Live, Record, Replay };

ProviderMode provider_mode_from_string(std::string_view s);
const char* to_string(ProviderMode mode);

/// Raw text-in/text-out transport; the HTTP client and all test doubles sit
/// behind this.
struct ChatTransport {
    virtual ~ChatTransport() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

struct HttpEndpoint {
    std::string base_url;
    std::string api_key;
    std::string model;
};

/// Generic chat-completions contract: POST {base}/chat/completions with
/// temperature pinned to 0.
class HttpChatTransport final : public ChatTransport {
public:
    explicit HttpChatTransport(HttpEndpoint endpoint);
    std::string complete(const std::string& prompt) override;

private:
    HttpEndpoint endpoint_;
};

/// Reads CKG_PROVIDER_URL / CKG_PROVIDER_KEY / CKG_PROVIDER_MODEL.
HttpEndpoint provider_endpoint_from_env();
/// Judge may use a distinct endpoint (CKG_JUDGE_URL / _KEY / _MODEL); any
/// unset value falls back to the provider endpoint.
HttpEndpoint judge_endpoint_from_env();

/// Kind-aware chat with strict schema validation and bounded retries. Every
/// response either validates against its kind's schema (plus the caller's
/// semantic check) or the call fails with MalformedAfterRetries carrying all
/// raw attempts. `max_retries` is the total attempt budget.
class ChatService {
public:
    using SemanticValidator =
        std::function<std::optional<std::string>(const nlohmann::json&)>;

    ChatService(const PromptRegistry* prompts, ProviderMode mode,
                TranscriptStore* transcript, ChatTransport* transport,
                int max_retries = 3);

    nlohmann::json chat(PromptKind kind, const nlohmann::json& payload);
    nlohmann::json chat(PromptKind kind, const nlohmann::json& payload,
                        const SemanticValidator& validator);

    std::string fingerprint(PromptKind kind, const nlohmann::json& payload) const;
    int max_retries() const { return max_retries_; }
    ProviderMode mode() const { return mode_; }

private:
    std::string raw_request(PromptKind kind, const nlohmann::json& payload,
                            bool with_correction);

    const PromptRegistry* prompts_;
    ProviderMode mode_;
    TranscriptStore* transcript_;
    ChatTransport* transport_;
    int max_retries_;
};

/// Schema validation for one raw response; returns the parsed value or
/// nullopt with `error` filled in.
std::optional<nlohmann::json> parse_chat_response(PromptKind kind, const std::string& raw,
                                                  std::string* error);

// ---------------------------------------------------------------------------
// Embeddings

enum class EmbedMode { Mock, Live, Record, Replay };

EmbedMode embed_mode_from_string(std::string_view s);
const char* to_string(EmbedMode mode);

/// Deterministic test embedder: per-token seeded expansion to 384 values,
/// summed over tokens and L2-normalized. Bit-stable across runs and
/// platforms; token-level hashing gives shared-word texts a graded cosine so
/// two-stage retrieval has realistic stage-1 candidates.
Embedding mock_embed(const std::string& text);

struct EmbedTransport {
    virtual ~EmbedTransport() = default;
    virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;
};

/// POST {base}/embeddings with {"model", "input": [...]}.
class HttpEmbedTransport final : public EmbedTransport {
public:
    explicit HttpEmbedTransport(HttpEndpoint endpoint);
    std::vector<Embedding> embed(std::span<const std::string> texts) override;

private:
    HttpEndpoint endpoint_;
};

/// Uniform embedding boundary. Deterministic per input within a session
/// (session cache); unit-norm outputs; order-preserving.
class EmbeddingService {
public:
    static EmbeddingService mock();
    EmbeddingService(EmbedMode mode, TranscriptStore* transcript, EmbedTransport* transport);

    std::vector<Embedding> embed(std::span<const std::string> texts);
    Embedding embed_one(const std::string& text);

    static std::string fingerprint(const std::string& text);

private:
    Embedding embed_uncached(const std::string& text);

    EmbedMode mode_;
    TranscriptStore* transcript_;
    EmbedTransport* transport_;
    std::mutex cache_mutex_;
    std::map<std::string, Embedding> cache_;
};

// ---------------------------------------------------------------------------
// Judge scores (1..5 rubric values produced by the judge_answer kind)

struct JudgeScores {
    int c_score = 1;
    int fr_score = 1;
};

}  // namespace ckgrag
