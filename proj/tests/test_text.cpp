#include <doctest.h>

#include <cmath>
#include <vector>

#include "ckgrag/embedding.hpp"
#include "ckgrag/error.hpp"
#include "ckgrag/text.hpp"

using namespace ckgrag;

TEST_CASE("canonical_text lowercases, collapses whitespace, trims") {
    CHECK(canonical_text("  Interest   Rates\tRISE \n") == "interest rates rise");
    CHECK(canonical_text("already canonical") == "already canonical");
    CHECK(canonical_text("   \t\n ") == "");
    CHECK(canonical_text("Caf\xc3\xa9 PRICES") == "caf\xc3\xa9 prices");
}

TEST_CASE("canonical_text applies NFC normalization") {
    // 'e' + combining acute composes to the precomposed form.
    std::string decomposed = "cafe\xcc\x81";
    std::string precomposed = "caf\xc3\xa9";
    CHECK(canonical_text(decomposed) == canonical_text(precomposed));
}

TEST_CASE("sha256_hex matches a known vector") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("base64 round-trips binary data") {
    std::vector<std::uint8_t> data;
    for (int i = 0; i < 257; ++i) data.push_back(static_cast<std::uint8_t>(i * 7));
    std::string encoded = base64_encode(data);
    CHECK(base64_decode(encoded) == data);
    CHECK(base64_decode("").empty());
    CHECK_THROWS_AS(base64_decode("abc"), Error);  // not a multiple of 4
}

TEST_CASE("split_tokens splits canonical text on spaces") {
    auto tokens = split_tokens("interest rates rise");
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[0] == "interest");
    CHECK(tokens[2] == "rise");
    CHECK(split_tokens("").empty());
}

TEST_CASE("Embedding normalizes on entry and rejects bad input") {
    std::vector<float> values(Embedding::kDim, 0.0f);
    values[0] = 3.0f;
    values[5] = 4.0f;
    Embedding e = Embedding::from_raw(values);

    double norm_sq = 0.0;
    for (float v : e.values()) norm_sq += static_cast<double>(v) * v;
    CHECK(std::abs(std::sqrt(norm_sq) - 1.0) < 1e-6);
    CHECK(e.values()[0] == doctest::Approx(0.6));
    CHECK(e.values()[5] == doctest::Approx(0.8));

    std::vector<float> zero(Embedding::kDim, 0.0f);
    CHECK_THROWS_AS(Embedding::from_raw(zero), Error);
    std::vector<float> short_vec(10, 1.0f);
    CHECK_THROWS_AS(Embedding::from_raw(short_vec), Error);
}

TEST_CASE("Embedding base64 round-trip is bit exact") {
    std::vector<float> values(Embedding::kDim);
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = static_cast<float>(i) - 191.5f;
    }
    Embedding e = Embedding::from_raw(values);
    Embedding back = Embedding::from_base64(e.to_base64());
    CHECK(back == e);
}
