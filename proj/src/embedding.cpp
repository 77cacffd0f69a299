#include "ckgrag/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ckgrag/error.hpp"
#include "ckgrag/text.hpp"

namespace ckgrag {

Embedding Embedding::from_raw(std::span<const float> values) {
    if (values.size() != kDim) {
        throw Error(ErrorKind::InvalidEmbedding,
                    "expected " + std::to_string(kDim) + " values, got " +
                        std::to_string(values.size()));
    }
    double norm_sq = 0.0;
    for (float v : values) norm_sq += static_cast<double>(v) * static_cast<double>(v);
    double norm = std::sqrt(norm_sq);
    if (!(norm > 1e-12)) {
        throw Error(ErrorKind::InvalidEmbedding, "zero-norm vector rejected");
    }
    Embedding out;
    for (std::size_t i = 0; i < kDim; ++i) {
        out.values_[i] = static_cast<float>(static_cast<double>(values[i]) / norm);
    }
    return out;
}

Embedding Embedding::from_unit(std::span<const float> values) {
    if (values.size() != kDim) {
        throw Error(ErrorKind::InvalidEmbedding,
                    "expected " + std::to_string(kDim) + " values, got " +
                        std::to_string(values.size()));
    }
    double norm_sq = 0.0;
    for (float v : values) norm_sq += static_cast<double>(v) * static_cast<double>(v);
    if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-4) {
        throw Error(ErrorKind::InvalidEmbedding, "stored vector is not unit norm");
    }
    Embedding out;
    std::copy(values.begin(), values.end(), out.values_.begin());
    return out;
}

double Embedding::dot(const Embedding& other) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < kDim; ++i) {
        acc += static_cast<double>(values_[i]) * static_cast<double>(other.values_[i]);
    }
    return std::clamp(acc, -1.0, 1.0);
}

std::string Embedding::to_base64() const {
    // Little-endian 32-bit floats, independent of host order.
    std::array<std::uint8_t, kDim * 4> bytes{};
    for (std::size_t i = 0; i < kDim; ++i) {
        std::uint32_t bits = 0;
        std::memcpy(&bits, &values_[i], 4);
        bytes[i * 4 + 0] = static_cast<std::uint8_t>(bits & 0xff);
        bytes[i * 4 + 1] = static_cast<std::uint8_t>((bits >> 8) & 0xff);
        bytes[i * 4 + 2] = static_cast<std::uint8_t>((bits >> 16) & 0xff);
        bytes[i * 4 + 3] = static_cast<std::uint8_t>((bits >> 24) & 0xff);
    }
    return base64_encode(bytes);
}

Embedding Embedding::from_base64(std::string_view encoded) {
    auto bytes = base64_decode(encoded);
    if (bytes.size() != kDim * 4) {
        throw Error(ErrorKind::CorruptFile, "embedding payload has wrong size");
    }
    std::array<float, kDim> values{};
    for (std::size_t i = 0; i < kDim; ++i) {
        std::uint32_t bits = static_cast<std::uint32_t>(bytes[i * 4 + 0]) |
                             (static_cast<std::uint32_t>(bytes[i * 4 + 1]) << 8) |
                             (static_cast<std::uint32_t>(bytes[i * 4 + 2]) << 16) |
                             (static_cast<std::uint32_t>(bytes[i * 4 + 3]) << 24);
        std::memcpy(&values[i], &bits, 4);
    }
    return from_unit(values);
}

}  // namespace ckgrag
