#include "ckgrag/baseline.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ckgrag/error.hpp"
#include "ckgrag/text.hpp"

namespace ckgrag {

using json = nlohmann::json;

namespace {
constexpr int kBaselineFormatVersion = 1;
}

BaselineIndex BaselineIndex::build(std::span<const Document> docs, EmbeddingService& embed,
                                   const BaselineConfig& cfg) {
    if (docs.empty()) {
        throw Error(ErrorKind::EmptyInput, "baseline index requires at least one document");
    }
    BaselineIndex index;
    for (const Document& doc : docs) {
        for (Chunk& chunk : chunk_document(doc.doc_id, doc.text, cfg.chunker)) {
            Embedding embedding = embed.embed_one(chunk.text);
            index.entries_.push_back(ChunkIndexEntry{std::move(chunk), embedding});
        }
    }
    return index;
}

std::vector<std::size_t> BaselineIndex::top_k(const Embedding& query, std::size_t k) const {
    std::vector<std::size_t> order(entries_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double sa = query.dot(entries_[a].embedding);
        double sb = query.dot(entries_[b].embedding);
        if (sa != sb) return sa > sb;
        return std::tie(entries_[a].chunk.doc_id, entries_[a].chunk.chunk_index) <
               std::tie(entries_[b].chunk.doc_id, entries_[b].chunk.chunk_index);
    });
    if (order.size() > k) order.resize(k);
    return order;
}

void BaselineIndex::save(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

    std::string payload;
    for (const ChunkIndexEntry& entry : entries_) {
        json record{{"doc_id", entry.chunk.doc_id},
                    {"chunk_index", entry.chunk.chunk_index},
                    {"char_start", entry.chunk.char_start},
                    {"char_end", entry.chunk.char_end},
                    {"text", entry.chunk.text},
                    {"embedding", entry.embedding.to_base64()}};
        payload += record.dump();
        payload += '\n';
    }
    json manifest{{"format_version", kBaselineFormatVersion},
                  {"chunk_count", entries_.size()},
                  {"checksum", sha256_hex(payload)}};
    write_file((dir / "baseline_chunks").string(), payload);
    write_file((dir / "baseline_manifest").string(), manifest.dump() + "\n");
}

BaselineIndex BaselineIndex::load(const std::filesystem::path& dir) {
    json manifest;
    try {
        manifest = json::parse(read_file((dir / "baseline_manifest").string()));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::CorruptFile,
                    std::string("baseline manifest is not valid JSON: ") + e.what());
    }
    int version = manifest.value("format_version", -1);
    if (version != kBaselineFormatVersion) {
        throw Error(ErrorKind::FormatVersionMismatch,
                    "expected baseline format_version " +
                        std::to_string(kBaselineFormatVersion) + ", found " +
                        std::to_string(version));
    }
    std::string payload = read_file((dir / "baseline_chunks").string());
    if (sha256_hex(payload) != manifest.value("checksum", "")) {
        throw Error(ErrorKind::CorruptFile, "baseline checksum mismatch in " + dir.string());
    }

    BaselineIndex index;
    std::istringstream in(payload);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::CorruptFile, std::string("bad baseline record: ") + e.what());
        }
        Chunk chunk{record.at("doc_id").get<std::string>(),
                    record.at("chunk_index").get<std::uint32_t>(),
                    record.at("char_start").get<std::size_t>(),
                    record.at("char_end").get<std::size_t>(),
                    record.at("text").get<std::string>()};
        index.entries_.push_back(ChunkIndexEntry{
            std::move(chunk), Embedding::from_base64(record.at("embedding").get<std::string>())});
    }
    if (index.entries_.size() != manifest.value("chunk_count", std::size_t{0})) {
        throw Error(ErrorKind::CorruptFile, "baseline manifest count does not match records");
    }
    return index;
}

BaselineAnswer answer_baseline(const std::string& query, const BaselineIndex& index,
                               EmbeddingService& embed, ChatService& chat,
                               const BaselineConfig& cfg) {
    if (index.size() == 0) {
        throw Error(ErrorKind::EmptyInput, "baseline index is empty");
    }
    Embedding query_embedding = embed.embed_one(query);
    auto order = index.top_k(query_embedding, cfg.baseline_k);

    BaselineAnswer answer;
    std::ostringstream context;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const ChunkIndexEntry& entry = index.entries()[order[i]];
        answer.retrieved.push_back(RetrievedChunk{entry.chunk.doc_id, entry.chunk.chunk_index,
                                                  query_embedding.dot(entry.embedding)});
        if (i > 0) context << "\n\n";
        context << "[" << entry.chunk.doc_id << "#" << entry.chunk.chunk_index << "]\n"
                << entry.chunk.text;
    }
    answer.context = context.str();

    json response = chat.chat(PromptKind::BaselineAnswer,
                              json{{"question", query}, {"context", answer.context}});
    answer.answer_text = response.at("answer").get<std::string>();
    return answer;
}

}  // namespace ckgrag
