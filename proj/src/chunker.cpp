#include "ckgrag/chunker.hpp"

#include <algorithm>
#include <cctype>

#include "ckgrag/error.hpp"

namespace ckgrag {

namespace {

bool is_sentence_end(std::string_view text, std::size_t pos) {
    char c = text[pos];
    if (c != '.' && c != '!' && c != '?') return false;
    if (pos + 1 >= text.size()) return true;
    return std::isspace(static_cast<unsigned char>(text[pos + 1])) != 0;
}

bool all_whitespace(std::string_view text) {
    return std::all_of(text.begin(), text.end(), [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) != 0;
    });
}

}  // namespace

std::vector<Chunk> chunk_document(std::string_view doc_id, std::string_view text,
                                  const ChunkerConfig& cfg) {
    if (text.empty() || all_whitespace(text)) {
        throw Error(ErrorKind::EmptyDocument, "document has no content: " + std::string(doc_id));
    }
    if (cfg.max_chunk_chars == 0) {
        throw Error(ErrorKind::Config, "max_chunk_chars must be positive");
    }

    std::vector<Chunk> chunks;
    std::size_t pos = 0;
    std::uint32_t index = 0;
    while (pos < text.size()) {
        std::size_t end;
        if (text.size() - pos <= cfg.max_chunk_chars) {
            end = text.size();
        } else {
            end = pos + cfg.max_chunk_chars;
            // Snap back to a sentence boundary inside the final 20% of the window.
            std::size_t snap_floor = pos + cfg.max_chunk_chars - cfg.max_chunk_chars / 5;
            for (std::size_t j = end; j > snap_floor; --j) {
                if (is_sentence_end(text, j - 1)) {
                    end = j;
                    break;
                }
            }
        }

        Chunk chunk;
        chunk.doc_id = std::string(doc_id);
        chunk.chunk_index = index++;
        chunk.char_start = pos;
        chunk.char_end = end;
        chunk.text = std::string(text.substr(pos, end - pos));
        chunks.push_back(std::move(chunk));

        if (end >= text.size()) break;
        std::size_t next = end > cfg.overlap_chars ? end - cfg.overlap_chars : 0;
        if (next <= pos) next = pos + 1;
        pos = next;
    }
    return chunks;
}

}  // namespace ckgrag
