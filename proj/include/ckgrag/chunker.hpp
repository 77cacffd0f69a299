#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ckgrag {

struct ChunkerConfig {
    std::size_t max_chunk_chars = 1200;
    std::size_t overlap_chars = 200;
};

/// A verbatim slice of a document: `text` equals the document substring at
/// [char_start, char_end).
struct Chunk {
    std::string doc_id;
    std::uint32_t chunk_index = 0;
    std::size_t char_start = 0;
    std::size_t char_end = 0;
    std::string text;
};

/// Sliding-window chunking with overlap. Windows snap backward to the
/// nearest sentence terminator ('.', '!', '?' followed by whitespace) when
/// one falls within the final 20% of the window. Chunk spans cover the whole
/// document; consecutive chunks overlap by `overlap_chars` (clamped so the
/// cursor always advances).
std::vector<Chunk> chunk_document(std::string_view doc_id, std::string_view text,
                                  const ChunkerConfig& cfg = {});

}  // namespace ckgrag
