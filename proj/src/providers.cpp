#include "ckgrag/providers.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include <httplib.h>

#include "ckgrag/error.hpp"
#include "ckgrag/store.hpp"
#include "ckgrag/text.hpp"

namespace ckgrag {

using json = nlohmann::json;

const char* to_string(PromptKind kind) {
    switch (kind) {
        case PromptKind::ExtractPairs: return "extract_pairs";
        case PromptKind::VerifyEquivalence: return "verify_equivalence";
        case PromptKind::ParseQuery: return "parse_query";
        case PromptKind::GenerateCounterfactual: return "generate_counterfactual";
        case PromptKind::SynthesizeAnswer: return "synthesize_answer";
        case PromptKind::JudgeAnswer: return "judge_answer";
        case PromptKind::BaselineAnswer: return "baseline_answer";
    }
    return "unknown";
}

ProviderMode provider_mode_from_string(std::string_view s) {
    if (s == "live") return ProviderMode::Live;
    if (s == "record") return ProviderMode::Record;
    if (s == "replay") return ProviderMode::Replay;
    throw Error(ErrorKind::Config, "unknown provider mode: " + std::string(s));
}

const char* to_string(ProviderMode mode) {
    switch (mode) {
        case ProviderMode::Live: return "live";
        case ProviderMode::Record: return "record";
        case ProviderMode::Replay: return "replay";
    }
    return "replay";
}

EmbedMode embed_mode_from_string(std::string_view s) {
    if (s == "mock") return EmbedMode::Mock;
    if (s == "live") return EmbedMode::Live;
    if (s == "record") return EmbedMode::Record;
    if (s == "replay") return EmbedMode::Replay;
    throw Error(ErrorKind::Config, "unknown embed mode: " + std::string(s));
}

const char* to_string(EmbedMode mode) {
    switch (mode) {
        case EmbedMode::Mock: return "mock";
        case EmbedMode::Live: return "live";
        case EmbedMode::Record: return "record";
        case EmbedMode::Replay: return "replay";
    }
    return "mock";
}

// ---------------------------------------------------------------------------
// PromptRegistry

PromptRegistry PromptRegistry::load(const std::filesystem::path& dir) {
    PromptRegistry registry;
    for (PromptKind kind : kAllPromptKinds) {
        std::filesystem::path file = dir / (std::string(to_string(kind)) + ".txt");
        std::string content;
        try {
            content = read_file(file.string());
        } catch (const Error&) {
            throw Error(ErrorKind::Config, "cannot load prompt template: " + file.string());
        }
        std::istringstream in(content);
        std::string version_line, separator;
        if (!std::getline(in, version_line) || version_line.rfind("version:", 0) != 0) {
            throw Error(ErrorKind::Config,
                        "prompt template must start with a version line: " + file.string());
        }
        std::string version = version_line.substr(8);
        version.erase(0, version.find_first_not_of(' '));
        if (version.empty()) {
            throw Error(ErrorKind::Config, "empty template version: " + file.string());
        }
        if (!std::getline(in, separator) || separator != "---") {
            throw Error(ErrorKind::Config,
                        "prompt template missing --- separator: " + file.string());
        }
        std::string body((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        registry.templates_[kind] = PromptTemplate{version, body};
    }
    return registry;
}

const PromptTemplate& PromptRegistry::get(PromptKind kind) const {
    auto it = templates_.find(kind);
    if (it == templates_.end()) {
        throw Error(ErrorKind::Config,
                    std::string("no template loaded for kind ") + to_string(kind));
    }
    return it->second;
}

std::string PromptRegistry::render(PromptKind kind, const json& payload) const {
    const PromptTemplate& tmpl = get(kind);
    std::string out;
    out.reserve(tmpl.body.size());
    const std::string& body = tmpl.body;
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t open = body.find("{{", pos);
        if (open == std::string::npos) {
            out.append(body, pos, std::string::npos);
            break;
        }
        out.append(body, pos, open - pos);
        std::size_t close = body.find("}}", open + 2);
        if (close == std::string::npos) {
            throw Error(ErrorKind::Config,
                        std::string("unclosed placeholder in template ") + to_string(kind));
        }
        std::string key = body.substr(open + 2, close - open - 2);
        if (!payload.contains(key)) {
            throw Error(ErrorKind::Config, "template " + std::string(to_string(kind)) +
                                               " references missing payload field: " + key);
        }
        const json& value = payload.at(key);
        out += value.is_string() ? value.get<std::string>() : value.dump();
        pos = close + 2;
    }
    return out;
}

// ---------------------------------------------------------------------------
// TranscriptStore

TranscriptStore::TranscriptStore(TranscriptStore&& other) noexcept {
    std::lock_guard lock(other.mutex_);
    entries_ = std::move(other.entries_);
    sink_ = std::move(other.sink_);
    sink_open_ = other.sink_open_;
}

TranscriptStore& TranscriptStore::operator=(TranscriptStore&& other) noexcept {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        entries_ = std::move(other.entries_);
        sink_ = std::move(other.sink_);
        sink_open_ = other.sink_open_;
    }
    return *this;
}

TranscriptStore TranscriptStore::open(const std::filesystem::path& file, bool must_exist) {
    TranscriptStore store;
    std::ifstream in(file);
    if (!in) {
        if (must_exist) {
            throw Error(ErrorKind::Io, "cannot open transcript: " + file.string());
        }
        return store;
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::CorruptFile, "transcript line " + std::to_string(line_no) +
                                                    " is not valid JSON: " + e.what());
        }
        store.entries_[record.at("fingerprint").get<std::string>()] =
            record.at("response").get<std::string>();
    }
    return store;
}

void TranscriptStore::attach_sink(const std::filesystem::path& file) {
    std::lock_guard lock(mutex_);
    if (file.has_parent_path()) {
        std::filesystem::create_directories(file.parent_path());
    }
    sink_ = file;
    sink_open_ = true;
}

std::optional<std::string> TranscriptStore::lookup(const std::string& fingerprint) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(fingerprint);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

bool TranscriptStore::record(const std::string& fingerprint, const std::string& kind,
                             const std::string& response) {
    std::lock_guard lock(mutex_);
    if (!entries_.emplace(fingerprint, response).second) return false;
    if (sink_open_) {
        std::ofstream out(sink_, std::ios::app | std::ios::binary);
        if (!out) throw Error(ErrorKind::Io, "cannot append transcript: " + sink_.string());
        json record{{"fingerprint", fingerprint}, {"kind", kind}, {"response", response}};
        out << record.dump() << "\n";
    }
    return true;
}

std::size_t TranscriptStore::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::string file_sha256(const std::filesystem::path& file) {
    return sha256_hex(read_file(file.string()));
}

// ---------------------------------------------------------------------------
// HTTP transports

namespace {

// httplib clients take scheme://host[:port]; any path prefix must be split off.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    std::size_t scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorKind::Config, "provider URL must include a scheme: " + base_url);
    }
    std::size_t path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

json post_json(const HttpEndpoint& endpoint, const std::string& path, const json& body) {
    auto [host, prefix] = split_base_url(endpoint.base_url);
    httplib::Client client(host);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!endpoint.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + endpoint.api_key);
    }
    auto result = client.Post(prefix + path, headers, body.dump(), "application/json");
    if (!result) {
        throw Error(ErrorKind::ProviderUnavailable,
                    "request to " + endpoint.base_url + path + " failed: " +
                        httplib::to_string(result.error()));
    }
    if (result->status < 200 || result->status >= 300) {
        throw Error(ErrorKind::ProviderUnavailable,
                    "provider returned HTTP " + std::to_string(result->status) + ": " +
                        result->body.substr(0, 500));
    }
    try {
        return json::parse(result->body);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ProviderUnavailable,
                    std::string("provider response is not JSON: ") + e.what());
    }
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value ? std::string(value) : fallback;
}

}  // namespace

HttpChatTransport::HttpChatTransport(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    if (endpoint_.base_url.empty()) {
        throw Error(ErrorKind::Config, "chat endpoint URL is empty (set CKG_PROVIDER_URL)");
    }
}

std::string HttpChatTransport::complete(const std::string& prompt) {
    json body{{"model", endpoint_.model},
              {"temperature", 0},
              {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})}};
    json response = post_json(endpoint_, "/chat/completions", body);
    try {
        return response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ProviderUnavailable,
                    std::string("unexpected chat-completions shape: ") + e.what());
    }
}

HttpEndpoint provider_endpoint_from_env() {
    return HttpEndpoint{env_or("CKG_PROVIDER_URL", ""), env_or("CKG_PROVIDER_KEY", ""),
                        env_or("CKG_PROVIDER_MODEL", "")};
}

HttpEndpoint judge_endpoint_from_env() {
    HttpEndpoint base = provider_endpoint_from_env();
    return HttpEndpoint{env_or("CKG_JUDGE_URL", base.base_url),
                        env_or("CKG_JUDGE_KEY", base.api_key),
                        env_or("CKG_JUDGE_MODEL", base.model)};
}

HttpEmbedTransport::HttpEmbedTransport(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    if (endpoint_.base_url.empty()) {
        throw Error(ErrorKind::Config, "embed endpoint URL is empty (set CKG_PROVIDER_URL)");
    }
}

std::vector<Embedding> HttpEmbedTransport::embed(std::span<const std::string> texts) {
    json body{{"model", endpoint_.model}, {"input", json(texts)}};
    json response = post_json(endpoint_, "/embeddings", body);
    std::vector<Embedding> out;
    try {
        const json& data = response.at("data");
        if (data.size() != texts.size()) {
            throw Error(ErrorKind::ProviderUnavailable,
                        "embedding count does not match input count");
        }
        out.reserve(data.size());
        for (const json& item : data) {
            std::vector<float> values = item.at("embedding").get<std::vector<float>>();
            out.push_back(Embedding::from_raw(values));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ProviderUnavailable,
                    std::string("unexpected embeddings shape: ") + e.what());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Response schemas

namespace {

constexpr const char* kCorrectionSuffix =
    "Your previous reply was not acceptable. Respond with exactly one JSON object "
    "matching the required schema: no extra fields, no markdown fences, no commentary.";

std::string trim_copy(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

bool expect_keys(const json& value, std::initializer_list<const char*> keys,
                 std::string* error) {
    if (!value.is_object()) {
        *error = "response is not a JSON object";
        return false;
    }
    for (const auto& [key, _] : value.items()) {
        bool known = false;
        for (const char* expected : keys) {
            if (key == expected) { known = true; break; }
        }
        if (!known) {
            *error = "unknown field: " + key;
            return false;
        }
    }
    for (const char* expected : keys) {
        if (!value.contains(expected)) {
            *error = std::string("missing field: ") + expected;
            return false;
        }
    }
    return true;
}

bool nonempty_string(const json& value, const char* field, std::string* error) {
    if (!value.is_string() || value.get<std::string>().empty()) {
        *error = std::string(field) + " must be a non-empty string";
        return false;
    }
    return true;
}

bool valid_polarity(const json& value, std::string* error) {
    if (!value.is_string()) {
        *error = "polarity must be a string";
        return false;
    }
    try {
        polarity_from_string(value.get<std::string>());
    } catch (const Error&) {
        *error = "polarity must be one of increase/decrease/presence/absence/neutral";
        return false;
    }
    return true;
}

bool valid_event_draft(const json& value, std::string* error) {
    if (!expect_keys(value, {"text", "polarity"}, error)) return false;
    if (!nonempty_string(value.at("text"), "text", error)) return false;
    return valid_polarity(value.at("polarity"), error);
}

bool string_array(const json& value, const char* field, std::string* error) {
    if (!value.is_array()) {
        *error = std::string(field) + " must be an array";
        return false;
    }
    for (const json& item : value) {
        if (!item.is_string() || item.get<std::string>().empty()) {
            *error = std::string(field) + " entries must be non-empty strings";
            return false;
        }
    }
    return true;
}

bool score_in_range(const json& value, const char* field, std::string* error) {
    if (!value.is_number_integer()) {
        *error = std::string(field) + " must be an integer";
        return false;
    }
    int v = value.get<int>();
    if (v < 1 || v > 5) {
        *error = std::string(field) + " must be between 1 and 5";
        return false;
    }
    return true;
}

}  // namespace

std::optional<json> parse_chat_response(PromptKind kind, const std::string& raw,
                                        std::string* error) {
    json value;
    try {
        value = json::parse(trim_copy(raw));
    } catch (const json::exception& e) {
        *error = std::string("not valid JSON: ") + e.what();
        return std::nullopt;
    }

    switch (kind) {
        case PromptKind::ExtractPairs: {
            if (!expect_keys(value, {"pairs"}, error)) return std::nullopt;
            if (!value.at("pairs").is_array()) {
                *error = "pairs must be an array";
                return std::nullopt;
            }
            for (const json& pair : value.at("pairs")) {
                if (!expect_keys(pair, {"cause", "effect"}, error)) return std::nullopt;
                if (!valid_event_draft(pair.at("cause"), error)) return std::nullopt;
                if (!valid_event_draft(pair.at("effect"), error)) return std::nullopt;
            }
            return value;
        }
        case PromptKind::VerifyEquivalence: {
            if (!expect_keys(value, {"same_event", "same_polarity"}, error)) return std::nullopt;
            if (!value.at("same_event").is_boolean() || !value.at("same_polarity").is_boolean()) {
                *error = "same_event and same_polarity must be booleans";
                return std::nullopt;
            }
            return value;
        }
        case PromptKind::ParseQuery: {
            if (!expect_keys(value, {"evidences", "interventions", "query_variable", "main_event"},
                             error)) {
                return std::nullopt;
            }
            if (!string_array(value.at("evidences"), "evidences", error)) return std::nullopt;
            if (!string_array(value.at("interventions"), "interventions", error))
                return std::nullopt;
            if (!value.at("query_variable").is_string()) {
                *error = "query_variable must be a string";
                return std::nullopt;
            }
            if (!nonempty_string(value.at("main_event"), "main_event", error))
                return std::nullopt;
            return value;
        }
        case PromptKind::GenerateCounterfactual: {
            if (!expect_keys(value, {"counterfactual"}, error)) return std::nullopt;
            if (!nonempty_string(value.at("counterfactual"), "counterfactual", error))
                return std::nullopt;
            return value;
        }
        case PromptKind::SynthesizeAnswer:
        case PromptKind::BaselineAnswer: {
            if (!expect_keys(value, {"answer"}, error)) return std::nullopt;
            if (!nonempty_string(value.at("answer"), "answer", error)) return std::nullopt;
            return value;
        }
        case PromptKind::JudgeAnswer: {
            if (!expect_keys(value, {"c_score", "fr_score"}, error)) return std::nullopt;
            if (!score_in_range(value.at("c_score"), "c_score", error)) return std::nullopt;
            if (!score_in_range(value.at("fr_score"), "fr_score", error)) return std::nullopt;
            return value;
        }
    }
    *error = "unknown prompt kind";
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// ChatService

ChatService::ChatService(const PromptRegistry* prompts, ProviderMode mode,
                         TranscriptStore* transcript, ChatTransport* transport,
                         int max_retries)
    : prompts_(prompts),
      mode_(mode),
      transcript_(transcript),
      transport_(transport),
      max_retries_(max_retries < 1 ? 1 : max_retries) {}

std::string ChatService::fingerprint(PromptKind kind, const json& payload) const {
    const PromptTemplate& tmpl = prompts_->get(kind);
    return sha256_hex(std::string(to_string(kind)) + '\x1f' + tmpl.version + '\x1f' +
                      payload.dump());
}

json ChatService::chat(PromptKind kind, const json& payload) {
    return chat(kind, payload, SemanticValidator{});
}

json ChatService::chat(PromptKind kind, const json& payload,
                       const SemanticValidator& validator) {
    std::vector<std::string> attempts;
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt < max_retries_; ++attempt) {
        json attempt_payload = payload;
        if (attempt > 0) attempt_payload["retry"] = attempt;
        std::string raw = raw_request(kind, attempt_payload, attempt > 0);
        attempts.push_back(raw);
        std::string error;
        auto parsed = parse_chat_response(kind, raw, &error);
        if (!parsed) {
            last_error = error;
            continue;
        }
        if (validator) {
            auto semantic = validator(*parsed);
            if (semantic) {
                last_error = *semantic;
                continue;
            }
        }
        return *parsed;
    }
    throw MalformedAfterRetriesError(std::string(to_string(kind)) + " failed after " +
                                         std::to_string(max_retries_) + " attempts; last error: " +
                                         last_error,
                                     std::move(attempts));
}

std::string ChatService::raw_request(PromptKind kind, const json& payload,
                                     bool with_correction) {
    std::string fp = fingerprint(kind, payload);
    auto call_live = [&]() {
        if (transport_ == nullptr) {
            throw Error(ErrorKind::ProviderUnavailable,
                        std::string("no live transport configured for mode ") +
                            to_string(mode_));
        }
        std::string prompt = prompts_->render(kind, payload);
        if (with_correction) prompt += std::string("\n\n") + kCorrectionSuffix;
        return transport_->complete(prompt);
    };
    switch (mode_) {
        case ProviderMode::Replay: {
            auto hit = transcript_->lookup(fp);
            if (!hit) {
                throw Error(ErrorKind::ProviderUnavailable,
                            std::string("transcript miss for kind ") + to_string(kind) +
                                ", fingerprint " + fp);
            }
            return *hit;
        }
        case ProviderMode::Record: {
            if (auto hit = transcript_->lookup(fp)) return *hit;
            std::string raw = call_live();
            transcript_->record(fp, to_string(kind), raw);
            return raw;
        }
        case ProviderMode::Live:
            return call_live();
    }
    throw Error(ErrorKind::Config, "invalid provider mode");
}

// ---------------------------------------------------------------------------
// Embeddings

Embedding mock_embed(const std::string& text) {
    std::string canonical = canonical_text(text);
    if (canonical.empty()) throw Error(ErrorKind::EmptyInput, "cannot embed empty text");
    std::array<double, Embedding::kDim> acc{};
    for (const std::string& token : split_tokens(canonical)) {
        // mt19937_64 raw output is specified by the standard, so the
        // expansion is identical on every platform.
        std::mt19937_64 gen(sha256_seed(token));
        for (std::size_t i = 0; i < Embedding::kDim; ++i) {
            double unit = static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0);
            acc[i] += 2.0 * unit - 1.0;
        }
    }
    std::array<float, Embedding::kDim> values{};
    for (std::size_t i = 0; i < Embedding::kDim; ++i) values[i] = static_cast<float>(acc[i]);
    return Embedding::from_raw(values);
}

EmbeddingService EmbeddingService::mock() {
    return EmbeddingService(EmbedMode::Mock, nullptr, nullptr);
}

EmbeddingService::EmbeddingService(EmbedMode mode, TranscriptStore* transcript,
                                   EmbedTransport* transport)
    : mode_(mode), transcript_(transcript), transport_(transport) {}

std::string EmbeddingService::fingerprint(const std::string& text) {
    return sha256_hex(std::string("embed") + '\x1f' + "1" + '\x1f' +
                      json{{"text", text}}.dump());
}

std::vector<Embedding> EmbeddingService::embed(std::span<const std::string> texts) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) out.push_back(embed_one(text));
    return out;
}

Embedding EmbeddingService::embed_one(const std::string& text) {
    if (text.empty()) throw Error(ErrorKind::EmptyInput, "cannot embed empty text");
    {
        std::lock_guard lock(cache_mutex_);
        auto it = cache_.find(text);
        if (it != cache_.end()) return it->second;
    }
    Embedding result = embed_uncached(text);
    std::lock_guard lock(cache_mutex_);
    return cache_.emplace(text, result).first->second;
}

Embedding EmbeddingService::embed_uncached(const std::string& text) {
    auto call_live = [&]() {
        if (transport_ == nullptr) {
            throw Error(ErrorKind::ProviderUnavailable,
                        std::string("no embedding transport configured for mode ") +
                            to_string(mode_));
        }
        std::array<std::string, 1> batch{text};
        return transport_->embed(batch).at(0);
    };
    switch (mode_) {
        case EmbedMode::Mock:
            return mock_embed(text);
        case EmbedMode::Replay: {
            std::string fp = fingerprint(text);
            auto hit = transcript_->lookup(fp);
            if (!hit) {
                throw Error(ErrorKind::ProviderUnavailable,
                            "transcript miss for kind embed, fingerprint " + fp);
            }
            return Embedding::from_base64(*hit);
        }
        case EmbedMode::Record: {
            std::string fp = fingerprint(text);
            if (auto hit = transcript_->lookup(fp)) return Embedding::from_base64(*hit);
            Embedding result = call_live();
            transcript_->record(fp, "embed", result.to_base64());
            return result;
        }
        case EmbedMode::Live:
            return call_live();
    }
    throw Error(ErrorKind::Config, "invalid embed mode");
}

}  // namespace ckgrag
