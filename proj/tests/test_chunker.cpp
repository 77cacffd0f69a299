#include <doctest.h>

#include <random>
#include <string>

#include "ckgrag/chunker.hpp"
#include "ckgrag/error.hpp"

using namespace ckgrag;

namespace {

// Sentences of known length so boundary positions can be computed by hand.
std::string make_sentences(std::size_t count, std::size_t sentence_len) {
    std::string text;
    for (std::size_t i = 0; i < count; ++i) {
        std::string sentence(sentence_len - 2, 'a' + static_cast<char>(i % 26));
        text += sentence + ". ";
    }
    text.pop_back();  // no trailing space
    return text;
}

}  // namespace

TEST_CASE("short document yields a single chunk equal to the document") {
    std::string text(100, 'x');
    text[50] = ' ';
    auto chunks = chunk_document("doc", text, ChunkerConfig{1200, 200});
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].text == text);
    CHECK(chunks[0].char_start == 0);
    CHECK(chunks[0].char_end == text.size());
    CHECK(chunks[0].chunk_index == 0);
}

TEST_CASE("whitespace-only document is rejected") {
    CHECK_THROWS_AS(chunk_document("doc", "   \n\t  ", ChunkerConfig{}), Error);
    CHECK_THROWS_AS(chunk_document("doc", "", ChunkerConfig{}), Error);
}

TEST_CASE("3000-char document chunks with overlap and covers the text") {
    std::string text = make_sentences(60, 50);  // 60 sentences, 50 chars each = 3000 chars
    REQUIRE(text.size() == 2999);               // last sentence has no trailing space
    ChunkerConfig cfg{1200, 200};
    auto chunks = chunk_document("doc", text, cfg);
    REQUIRE(chunks.size() >= 3);

    // Reference segmentation computed by hand: block i spans [50i, 50i+50)
    // with '.' at 50i+48 and a space at 50i+49. The window [0, 1200) snaps to
    // the last '.'+1 inside (960, 1200): the '.' at 1198, so the chunk ends at
    // 1199. The next window starts at 1199-200=999 and snaps at the '.' at
    // 2198; the remainder fits in one final chunk.
    CHECK(chunks[0].char_start == 0);
    CHECK(chunks[0].char_end == 1199);
    CHECK(chunks[1].char_start == 999);
    CHECK(chunks[1].char_end == 2199);
    CHECK(chunks[2].char_start == 1999);
    CHECK(chunks[2].char_end == 2999);
    CHECK(chunks.size() == 3);

    for (std::size_t i = 0; i < chunks.size(); ++i) {
        CHECK(chunks[i].chunk_index == i);
        CHECK(chunks[i].text == text.substr(chunks[i].char_start,
                                            chunks[i].char_end - chunks[i].char_start));
        CHECK(chunks[i].text.size() <= cfg.max_chunk_chars);
        if (i > 0) {
            // Adjacent chunks share at least one character.
            CHECK(chunks[i].char_start < chunks[i - 1].char_end);
        }
    }
    CHECK(chunks.front().char_start == 0);
    CHECK(chunks.back().char_end == text.size());
}

TEST_CASE("boundary snaps only within the final 20% of the window") {
    // One sentence ending early (position 100), then unbroken text: the snap
    // window [960, 1200) has no terminator, so the chunk cuts at 1200.
    std::string text(3000, 'b');
    text[99] = '.';
    text[100] = ' ';
    auto chunks = chunk_document("doc", text, ChunkerConfig{1200, 200});
    CHECK(chunks[0].char_end == 1200);

    // Now drop a sentence end inside the final 20%.
    text[1000] = '.';
    text[1001] = ' ';
    chunks = chunk_document("doc", text, ChunkerConfig{1200, 200});
    CHECK(chunks[0].char_end == 1001);
}

TEST_CASE("cursor always advances even with extreme overlap") {
    std::string text(50, 'q');
    for (std::size_t i = 9; i < text.size(); i += 10) text[i] = ' ';
    auto chunks = chunk_document("doc", text, ChunkerConfig{10, 9});
    for (std::size_t i = 1; i < chunks.size(); ++i) {
        CHECK(chunks[i].char_start > chunks[i - 1].char_start);
    }
    CHECK(chunks.back().char_end == text.size());
}

TEST_CASE("chunk spans cover random documents") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t len = 200 + gen() % 5000;
        std::string text;
        for (std::size_t i = 0; i < len; ++i) {
            unsigned r = gen() % 26;
            text.push_back(r < 2 ? ' ' : static_cast<char>('a' + r));
            if (gen() % 37 == 0) text += ". ";
        }
        auto chunks = chunk_document("doc", text, ChunkerConfig{300, 60});
        CHECK(chunks.front().char_start == 0);
        CHECK(chunks.back().char_end == text.size());
        for (std::size_t i = 1; i < chunks.size(); ++i) {
            CHECK(chunks[i].char_start <= chunks[i - 1].char_end);  // coverage, no gaps
        }
    }
}
