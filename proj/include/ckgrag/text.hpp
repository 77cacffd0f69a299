#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ckgrag {

/// Canonical form used for node identity and the mock embedder:
/// NFC-normalized, lowercased, whitespace runs collapsed to single spaces,
/// leading/trailing whitespace removed.
std::string canonical_text(std::string_view text);

/// Splits on single spaces; input is expected to be canonical already.
std::vector<std::string> split_tokens(std::string_view canonical);

std::string sha256_hex(std::string_view data);

/// First 8 bytes of SHA-256, big-endian. Stable across platforms.
std::uint64_t sha256_seed(std::string_view data);

std::string base64_encode(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> base64_decode(std::string_view encoded);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace ckgrag
