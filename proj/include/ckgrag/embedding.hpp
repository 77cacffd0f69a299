#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

namespace ckgrag {

/// Unit-norm 384-dimensional embedding. Vectors are normalized on entry so
/// cosine similarity reduces to a dot product; zero vectors are rejected.
class Embedding {
public:
    static constexpr std::size_t kDim = 384;

    /// Normalizes `values` to unit length. Throws InvalidEmbedding on wrong
    /// dimension or (near-)zero norm.
    static Embedding from_raw(std::span<const float> values);

    /// Deserialization path: values must already be unit norm within 1e-4.
    static Embedding from_unit(std::span<const float> values);

    /// Cosine similarity; exact dot product for unit vectors, clamped to [-1, 1].
    double dot(const Embedding& other) const;

    std::span<const float, kDim> values() const { return values_; }

    std::string to_base64() const;
    static Embedding from_base64(std::string_view encoded);

    bool operator==(const Embedding& other) const { return values_ == other.values_; }

private:
    Embedding() = default;
    std::array<float, kDim> values_{};
};

}  // namespace ckgrag
