#include "ckgrag/text.hpp"

#include <openssl/evp.h>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <array>
#include <fstream>
#include <sstream>

#include "ckgrag/error.hpp"

namespace ckgrag {

std::string canonical_text(std::string_view text) {
    icu::UnicodeString input = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));

    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    icu::UnicodeString normalized =
        U_SUCCESS(status) ? nfc->normalize(input, status) : input;
    if (U_FAILURE(status)) normalized = input;

    normalized.toLower(icu::Locale::getRoot());

    // Collapse whitespace runs and trim.
    icu::UnicodeString collapsed;
    bool pending_space = false;
    for (int32_t i = 0; i < normalized.length();) {
        UChar32 c = normalized.char32At(i);
        i += U16_LENGTH(c);
        if (u_isUWhiteSpace(c)) {
            pending_space = collapsed.length() > 0;
            continue;
        }
        if (pending_space) {
            collapsed.append(static_cast<UChar32>(' '));
            pending_space = false;
        }
        collapsed.append(c);
    }

    std::string out;
    collapsed.toUTF8String(out);
    return out;
}

std::vector<std::string> split_tokens(std::string_view canonical) {
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (start < canonical.size()) {
        std::size_t end = canonical.find(' ', start);
        if (end == std::string_view::npos) end = canonical.size();
        if (end > start) tokens.emplace_back(canonical.substr(start, end - start));
        start = end + 1;
    }
    return tokens;
}

namespace {

std::array<std::uint8_t, 32> sha256_bytes(std::string_view data) {
    std::array<std::uint8_t, 32> digest{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
    return digest;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    static constexpr char kHex[] = "0123456789abcdef";
    auto digest = sha256_bytes(data);
    std::string out;
    out.reserve(64);
    for (std::uint8_t b : digest) {
        out.push_back(kHex[b >> 4]);
        out.push_back(kHex[b & 0x0f]);
    }
    return out;
}

std::uint64_t sha256_seed(std::string_view data) {
    auto digest = sha256_bytes(data);
    std::uint64_t seed = 0;
    for (int i = 0; i < 8; ++i) seed = (seed << 8) | digest[static_cast<std::size_t>(i)];
    return seed;
}

std::string base64_encode(std::span<const std::uint8_t> data) {
    if (data.empty()) return {};
    std::string out;
    out.resize(4 * ((data.size() + 2) / 3));
    int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  data.data(), static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(written));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view encoded) {
    if (encoded.empty()) return {};
    if (encoded.size() % 4 != 0) {
        throw Error(ErrorKind::CorruptFile, "base64 payload has invalid length");
    }
    std::vector<std::uint8_t> out(3 * encoded.size() / 4);
    int written = EVP_DecodeBlock(out.data(),
                                  reinterpret_cast<const unsigned char*>(encoded.data()),
                                  static_cast<int>(encoded.size()));
    if (written < 0) {
        throw Error(ErrorKind::CorruptFile, "base64 payload failed to decode");
    }
    std::size_t padding = 0;
    if (encoded.size() >= 1 && encoded[encoded.size() - 1] == '=') ++padding;
    if (encoded.size() >= 2 && encoded[encoded.size() - 2] == '=') ++padding;
    out.resize(static_cast<std::size_t>(written) - padding);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidEmbedding: return "InvalidEmbedding";
        case ErrorKind::EmptyText: return "EmptyText";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::EmptyDocument: return "EmptyDocument";
        case ErrorKind::UnknownNode: return "UnknownNode";
        case ErrorKind::SelfLoop: return "SelfLoop";
        case ErrorKind::Io: return "Io";
        case ErrorKind::FormatVersionMismatch: return "FormatVersionMismatch";
        case ErrorKind::CorruptFile: return "CorruptFile";
        case ErrorKind::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorKind::MalformedAfterRetries: return "MalformedAfterRetries";
        case ErrorKind::InconsistentInputs: return "InconsistentInputs";
        case ErrorKind::NoRelevantDocs: return "NoRelevantDocs";
        case ErrorKind::QuestionKindMismatch: return "QuestionKindMismatch";
        case ErrorKind::Config: return "Config";
    }
    return "Unknown";
}

}  // namespace ckgrag
